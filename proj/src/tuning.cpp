#include "invm/tuning.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "invm/errors.hpp"

namespace invm {

void SelectionCriteria::validate() const {
    auto fraction_ok = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!fraction_ok(min_negative_fraction))
        throw domain_error("SelectionCriteria: min_negative_fraction must lie in (0,1]");
    if (!fraction_ok(max_transient_fraction))
        throw domain_error("SelectionCriteria: max_transient_fraction must lie in (0,1]");
    if (!fraction_ok(late_window_fraction))
        throw domain_error("SelectionCriteria: late_window_fraction must lie in (0,1]");
    if (!(max_positive_excursion > 0.0))
        throw domain_error("SelectionCriteria: max_positive_excursion must be positive");
}

const char* alpha_class_name(AlphaClass c) {
    return c == AlphaClass::well_behaved ? "well_behaved" : "poor";
}

ProfileFeatures profile_features(const LyapunovProfile& p, const SelectionCriteria& criteria) {
    criteria.validate();
    if (p.entries.empty())
        throw insufficient_data_error("profile_features: empty profile");

    const int len = static_cast<int>(p.entries.size());
    ProfileFeatures f;
    f.profile_length = len;

    // lambda1 == 0 is the flat GMAE-floor signature of a converged batch and
    // counts as contractive, same as the estimator's own reading of it.
    auto contractive = [](double l1) { return l1 <= 0.0; };

    int negatives = 0;
    double max_l1 = p.entries.front().fit.lambda1;
    for (const auto& e : p.entries) {
        if (contractive(e.fit.lambda1))
            ++negatives;
        max_l1 = std::max(max_l1, e.fit.lambda1);
    }
    f.negative_fraction = static_cast<double>(negatives) / len;
    f.max_excursion = std::max(0.0, max_l1);

    int tail = len; // first index after which the profile stays contractive
    for (int i = len - 1; i >= 0; --i) {
        if (contractive(p.entries[static_cast<std::size_t>(i)].fit.lambda1))
            tail = i;
        else
            break;
    }
    f.transient_end_index = tail;

    const int late = std::max(1, static_cast<int>(std::floor(criteria.late_window_fraction * len)));
    double sum = 0.0;
    for (int i = len - late; i < len; ++i)
        sum += p.entries[static_cast<std::size_t>(i)].fit.lambda1;
    f.mean_late_lambda1 = sum / late;
    return f;
}

AlphaClass classify_alpha(const ProfileFeatures& features, const SelectionCriteria& criteria) {
    criteria.validate();
    const bool ok =
        features.negative_fraction >= criteria.min_negative_fraction &&
        static_cast<double>(features.transient_end_index) <=
            criteria.max_transient_fraction * features.profile_length &&
        features.max_excursion <= criteria.max_positive_excursion;
    return ok ? AlphaClass::well_behaved : AlphaClass::poor;
}

TuningReport select_alpha(
    const std::vector<std::pair<double, std::vector<LyapunovProfile>>>& profiles_per_alpha,
    const SelectionCriteria& criteria) {
    criteria.validate();
    if (profiles_per_alpha.empty())
        throw insufficient_data_error("select_alpha: no candidates");

    TuningReport report;
    for (const auto& [alpha, profiles] : profiles_per_alpha) {
        if (profiles.empty())
            throw insufficient_data_error("select_alpha: candidate without profiles");
        AlphaRecord rec;
        rec.alpha = alpha;
        bool all_well = true;
        double late_sum = 0.0, neg_sum = 0.0;
        for (const auto& p : profiles) {
            const ProfileFeatures f = profile_features(p, criteria);
            all_well = all_well && classify_alpha(f, criteria) == AlphaClass::well_behaved;
            neg_sum += f.negative_fraction;
            late_sum += f.mean_late_lambda1;
            rec.transient_end_index = std::max(rec.transient_end_index, f.transient_end_index);
            rec.max_excursion = std::max(rec.max_excursion, f.max_excursion);
        }
        rec.negative_fraction = neg_sum / static_cast<double>(profiles.size());
        rec.mean_late_lambda1 = late_sum / static_cast<double>(profiles.size());
        rec.classification = all_well ? AlphaClass::well_behaved : AlphaClass::poor;
        report.per_alpha.push_back(rec);
    }

    const AlphaRecord* best = nullptr;
    for (const auto& rec : report.per_alpha) {
        if (rec.classification != AlphaClass::well_behaved)
            continue;
        if (!best || rec.mean_late_lambda1 < best->mean_late_lambda1 ||
            (rec.mean_late_lambda1 == best->mean_late_lambda1 &&
             (rec.transient_end_index < best->transient_end_index ||
              (rec.transient_end_index == best->transient_end_index && rec.alpha < best->alpha))))
            best = &rec;
    }
    if (!best) {
        report.fallback = true;
        for (const auto& rec : report.per_alpha)
            if (!best || rec.negative_fraction > best->negative_fraction ||
                (rec.negative_fraction == best->negative_fraction && rec.alpha < best->alpha))
                best = &rec;
    }
    report.selected_alpha = best->alpha;
    return report;
}

std::string tuning_report_json(const TuningReport& report) {
    nlohmann::json j;
    j["selected_alpha"] = report.selected_alpha;
    j["fallback"] = report.fallback;
    j["observable"] = report.observable;
    j["case_label"] = report.case_label;
    j["per_alpha"] = nlohmann::json::array();
    for (const auto& rec : report.per_alpha) {
        nlohmann::json r;
        r["alpha"] = rec.alpha;
        r["negative_fraction"] = rec.negative_fraction;
        r["transient_end_index"] = rec.transient_end_index;
        r["max_excursion"] = rec.max_excursion;
        r["mean_late_lambda1"] = rec.mean_late_lambda1;
        r["classification"] = alpha_class_name(rec.classification);
        j["per_alpha"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

double least_squares_slope(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 2)
        throw insufficient_data_error("least_squares_slope: need at least 2 values");
    const double xm = (static_cast<double>(n) - 1.0) / 2.0;
    double ym = 0.0;
    for (double v : y)
        ym += v;
    ym /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xm;
        sxy += dx * (y[i] - ym);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

AdaptiveResult adaptive_solve(const Polynomial& f, std::span<const Complex> x0,
                              const SolverParams& params,
                              std::span<const double> alpha_candidates,
                              const AdaptiveWatch& watch) {
    if (alpha_candidates.empty())
        throw domain_error("adaptive_solve: no alpha candidates");
    if (watch.window_len < 2 || watch.patience < 1)
        throw domain_error("adaptive_solve: window_len >= 2 and patience >= 1 required");
    params.validate();
    if (static_cast<int>(x0.size()) != f.degree())
        throw domain_error("adaptive_solve: x0 length must equal the polynomial degree");

    constexpr double kLogFloor = 1e-300;
    const double cap = params.divergence_cap;
    auto capped = [cap](double v) { return std::isfinite(v) ? std::min(v, cap) : cap; };

    AdaptiveResult result;
    SolverTrace& trace = result.trace;
    trace.iterates.emplace_back(x0.begin(), x0.end());
    ComplexVec x(x0.begin(), x0.end());

    std::size_t alpha_idx = 0;
    SolverParams cur = params;
    cur.alpha = alpha_candidates[0];
    int consecutive_positive = 0;

    for (int k = 0; k < params.max_iters; ++k) {
        const double rk = capped(residual_norm(f, x));

        ComplexVec xn;
        bool step_failed = false;
        try {
            xn = invm_step(f, x, cur);
        } catch (const degenerate_input_error&) {
            step_failed = true;
        } catch (const degenerate_derivative_error&) {
            step_failed = true;
        } catch (const overflow_error&) {
            step_failed = true;
        }

        double sk = cap;
        bool escaped = step_failed;
        if (!step_failed) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                s += std::norm(xn[i] - x[i]);
                if (!is_finite(xn[i]) || std::abs(xn[i]) > cap)
                    escaped = true;
            }
            sk = capped(std::sqrt(s));
        }

        trace.step_norms.push_back(sk);
        trace.residual_norms.push_back(rk);
        trace.iterations_used = k + 1;

        if (escaped) {
            trace.status = SolverStatus::diverged;
            break;
        }
        x = std::move(xn);
        trace.iterates.push_back(x);

        if (rk <= params.tol) {
            trace.status = SolverStatus::converged;
            break;
        }

        // trailing-window instability proxy on ln(s_k + floor)
        if (static_cast<int>(trace.step_norms.size()) >= watch.window_len) {
            std::vector<double> window(static_cast<std::size_t>(watch.window_len));
            const std::size_t off = trace.step_norms.size() - watch.window_len;
            for (int i = 0; i < watch.window_len; ++i)
                window[static_cast<std::size_t>(i)] =
                    std::log(trace.step_norms[off + static_cast<std::size_t>(i)] + kLogFloor);
            if (least_squares_slope(window) > 0.0)
                ++consecutive_positive;
            else
                consecutive_positive = 0;
            if (consecutive_positive >= watch.patience) {
                const double from = cur.alpha;
                alpha_idx = (alpha_idx + 1) % alpha_candidates.size();
                cur.alpha = alpha_candidates[alpha_idx];
                result.switches.push_back({k, from, cur.alpha});
                consecutive_positive = 0;
            }
        }
    }

    result.final_alpha = cur.alpha;
    return result;
}

} // namespace invm
