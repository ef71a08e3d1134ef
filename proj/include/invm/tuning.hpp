#ifndef INVM_TUNING_HPP
#define INVM_TUNING_HPP

#include <map>
#include <string>
#include <vector>

#include "invm/lle.hpp"

namespace invm {

struct SelectionCriteria {
    double min_negative_fraction = 0.8;
    double max_transient_fraction = 0.3;
    double max_positive_excursion = 0.5;
    double late_window_fraction = 0.5;

    void validate() const;
};

enum class AlphaClass { well_behaved, poor };

const char* alpha_class_name(AlphaClass c);

struct ProfileFeatures {
    double negative_fraction = 0.0;  // share of windows with lambda1 < 0
    int transient_end_index = 0;     // first index after which lambda1 < 0 throughout
    double max_excursion = 0.0;      // max(0, max lambda1)
    double mean_late_lambda1 = 0.0;  // mean over the trailing late-window share
    int profile_length = 0;
};

ProfileFeatures profile_features(const LyapunovProfile& p,
                                 const SelectionCriteria& criteria = {});

AlphaClass classify_alpha(const ProfileFeatures& features, const SelectionCriteria& criteria);

struct AlphaRecord {
    double alpha = 0.0;
    double negative_fraction = 0.0;
    int transient_end_index = 0;
    double max_excursion = 0.0;
    double mean_late_lambda1 = 0.0;
    AlphaClass classification = AlphaClass::poor;
};

struct TuningReport {
    std::vector<AlphaRecord> per_alpha; // input order preserved
    double selected_alpha = 0.0;
    bool fallback = false;              // no alpha was well behaved
    std::string observable;             // "sk", "rk" or "combined"
    std::string case_label;             // case label or "all"
};

// Selection over one or more profiles per alpha. An alpha is well behaved
// only if every one of its profiles classifies well behaved; ranking uses
// the mean of mean_late_lambda1 across profiles (strongest late
// contraction wins), ties broken by smaller transient end then smaller
// alpha. With no well-behaved alpha the report is flagged and the largest
// negative_fraction wins.
TuningReport select_alpha(const std::vector<std::pair<double, std::vector<LyapunovProfile>>>& profiles_per_alpha,
                          const SelectionCriteria& criteria);

std::string tuning_report_json(const TuningReport& report);

struct AdaptiveWatch {
    int window_len = 8;
    int patience = 3;
};

struct SwitchEvent {
    int iteration = 0;
    double from_alpha = 0.0;
    double to_alpha = 0.0;
};

struct AdaptiveResult {
    SolverTrace trace;
    std::vector<SwitchEvent> switches;
    double final_alpha = 0.0;
};

// Least-squares slope of y over positions 0..n-1; exact zero on constant y.
double least_squares_slope(std::span<const double> y);

// INVM^alpha driver that starts from alpha_candidates[0] and, whenever the
// trailing-window slope of ln(s_k + floor) stays positive for `patience`
// consecutive checks, advances to the next candidate (cycling) from the
// current state. Norms are recorded continuously across switches.
AdaptiveResult adaptive_solve(const Polynomial& f, std::span<const Complex> x0,
                              const SolverParams& params,
                              std::span<const double> alpha_candidates,
                              const AdaptiveWatch& watch = {});

} // namespace invm

#endif
