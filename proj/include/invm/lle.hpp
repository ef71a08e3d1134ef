#ifndef INVM_LLE_HPP
#define INVM_LLE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "invm/ensemble.hpp"

namespace invm {

struct LleParams {
    int look_back = 5;
    int h_min = 1;
    int h_max = 5;
    int h_step = 1;
    int k_neighbors = 3;
    double test_fraction = 0.4;
    std::uint64_t split_seed = 0;
    double gmae_floor = 1e-30;
    bool shared_split = true; // reuse one train/test split across horizons

    int micro_len() const { return look_back + h_max; }
    void validate() const;
};

struct SlopeFit {
    double lambda1 = 0.0;              // first-segment slope
    std::optional<double> lambda2;     // second slope when two segments win
    std::optional<int> h_split;
    double sse = 0.0;
    int segments = 1;
};

struct ProfileEntry {
    int t_end = 0;
    SlopeFit fit;
};

struct LyapunovProfile {
    std::vector<ProfileEntry> entries; // t_end = L .. n_iters
    Observable observable = Observable::step_norm;
    std::string case_label;
    double alpha = 0.0;
};

// Rows x columns batch of micro-series: row j is run j's slice of length
// L = look_back + h_max ending at column t_end - 1.
struct Batch {
    std::vector<double> values; // row-major rows x len
    int rows = 0;
    int len = 0;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * len + c]; }
};

Batch make_batch(const EnsembleMatrix& X, int t_end, const LleParams& params);

// Geometric mean of absolute kNN forecast errors at horizon h. Inputs are
// the first look_back columns; the target sits look_back-1+h columns in.
// Rows split into train/test by a seeded permutation (first
// ceil((1-test_fraction)*rows) train); prediction is the unweighted mean of
// the k nearest train targets under Euclidean distance, ties broken by
// lower row index. Result is floored at gmae_floor.
double knn_gmae(const Batch& U, int h, const LleParams& params);

// (h, ln GMAE(h)) for h = h_min, h_min+h_step, ..., <= h_max.
struct CurvePoint {
    int h;
    double y;
};
std::vector<CurvePoint> log_gmae_curve(const Batch& U, const LleParams& params);

// Least-squares one-segment fit vs every admissible two-segment split
// (>= 2 points per side, split strictly inside the horizon range). The
// two-segment candidate wins only when it improves the one-segment SSE by
// at least 5%; ties go to one segment.
SlopeFit fit_best_slope(std::span<const CurvePoint> points, const LleParams& params);

// One SlopeFit per window end index, each from
// make_batch -> log_gmae_curve -> fit_best_slope, the split seeded
// deterministically from (split_seed, t_end).
LyapunovProfile lyapunov_profile(const EnsembleMatrix& X, const LleParams& params);

// Header t_end,lambda1,lambda2,h_split,segments,sse; empty fields for
// absent optionals.
std::filesystem::path write_profile_csv(const LyapunovProfile& p, const std::filesystem::path& path);
LyapunovProfile read_profile_csv(const std::filesystem::path& path);

std::string profile_csv_name(const LyapunovProfile& p);

// Per-window fit-curve data for plotting: t_end,h,y,fit per row, where fit
// is the selected piecewise model evaluated at h.
std::filesystem::path write_fit_curve_csv(const EnsembleMatrix& X, const LleParams& params,
                                          const std::filesystem::path& path);

} // namespace invm

#endif
