#include "invm/lle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "invm/errors.hpp"

namespace invm {

void LleParams::validate() const {
    if (look_back < 1)
        throw domain_error("LleParams: look_back must be >= 1");
    if (h_min < 1 || h_max < h_min || h_step < 1)
        throw domain_error("LleParams: need 1 <= h_min <= h_max and h_step >= 1");
    if (k_neighbors < 1)
        throw domain_error("LleParams: k_neighbors must be >= 1");
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
        throw domain_error("LleParams: test_fraction must lie in (0,1)");
    if (!(gmae_floor > 0.0))
        throw domain_error("LleParams: gmae_floor must be positive");
}

Batch make_batch(const EnsembleMatrix& X, int t_end, const LleParams& params) {
    params.validate();
    const int L = params.micro_len();
    if (t_end < L || t_end > X.n_iters)
        throw domain_error("make_batch: t_end out of range [" + std::to_string(L) + "," +
                           std::to_string(X.n_iters) + "]");
    Batch b;
    b.rows = X.n_runs;
    b.len = L;
    b.values.resize(static_cast<std::size_t>(b.rows) * L);
    for (int j = 0; j < b.rows; ++j)
        for (int c = 0; c < L; ++c)
            b.values[static_cast<std::size_t>(j) * L + c] = X.at(j, t_end - L + c);
    return b;
}

namespace {

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> test;
};

SplitIndices split_rows(int rows, const LleParams& params, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(rows));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    // Fisher-Yates; modulo draw keeps the stream implementation-independent
    for (int i = rows - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    const int n_train = static_cast<int>(
        std::ceil((1.0 - params.test_fraction) * static_cast<double>(rows)));
    SplitIndices s;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.test.assign(perm.begin() + n_train, perm.end());
    if (static_cast<int>(s.train.size()) < params.k_neighbors || s.test.empty())
        throw insufficient_data_error("knn_gmae: too few rows for train/test split");
    return s;
}

// k nearest train rows (Euclidean over the look-back block) for each test
// row, ties broken by lower row index. Neighbors depend only on the inputs,
// so one computation serves every horizon.
std::vector<std::vector<int>> neighbor_table(const Batch& U, const SplitIndices& split,
                                             const LleParams& params) {
    std::vector<std::vector<int>> neighbors(split.test.size());
    std::vector<std::pair<double, int>> dist(split.train.size());
    const int lb = params.look_back;
    for (std::size_t t = 0; t < split.test.size(); ++t) {
        const int ti = split.test[t];
        for (std::size_t s = 0; s < split.train.size(); ++s) {
            const int si = split.train[s];
            double d2 = 0.0;
            for (int c = 0; c < lb; ++c) {
                const double diff = U.at(ti, c) - U.at(si, c);
                d2 += diff * diff;
            }
            dist[s] = {d2, si};
        }
        const auto kth = dist.begin() + params.k_neighbors;
        std::partial_sort(dist.begin(), kth, dist.end());
        auto& nb = neighbors[t];
        nb.reserve(static_cast<std::size_t>(params.k_neighbors));
        for (auto it = dist.begin(); it != kth; ++it)
            nb.push_back(it->second);
    }
    return neighbors;
}

double gmae_for_horizon(const Batch& U, const SplitIndices& split,
                        const std::vector<std::vector<int>>& neighbors, int h,
                        const LleParams& params) {
    const int target_col = params.look_back - 1 + h;
    double log_sum = 0.0;
    bool any_zero = false;
    for (std::size_t t = 0; t < split.test.size(); ++t) {
        double pred = 0.0;
        for (int si : neighbors[t])
            pred += U.at(si, target_col);
        pred /= static_cast<double>(neighbors[t].size());
        const double err = std::abs(pred - U.at(split.test[t], target_col));
        if (err == 0.0)
            any_zero = true;
        else
            log_sum += std::log(err);
    }
    const double g = any_zero
                         ? 0.0
                         : std::exp(log_sum / static_cast<double>(split.test.size()));
    return std::max(g, params.gmae_floor);
}

std::uint64_t horizon_seed(const LleParams& params, int h) {
    return params.shared_split ? params.split_seed
                               : detail::mix_seed(params.split_seed, static_cast<std::uint64_t>(h));
}

void check_horizon(const LleParams& params, int h) {
    if (h < params.h_min || h > params.h_max)
        throw domain_error("horizon out of [h_min, h_max]");
}

} // namespace

double knn_gmae(const Batch& U, int h, const LleParams& params) {
    params.validate();
    check_horizon(params, h);
    const auto split = split_rows(U.rows, params, horizon_seed(params, h));
    const auto neighbors = neighbor_table(U, split, params);
    return gmae_for_horizon(U, split, neighbors, h, params);
}

std::vector<CurvePoint> log_gmae_curve(const Batch& U, const LleParams& params) {
    params.validate();
    std::vector<CurvePoint> pts;
    if (params.shared_split) {
        const auto split = split_rows(U.rows, params, params.split_seed);
        const auto neighbors = neighbor_table(U, split, params);
        for (int h = params.h_min; h <= params.h_max; h += params.h_step)
            pts.push_back({h, std::log(gmae_for_horizon(U, split, neighbors, h, params))});
    } else {
        for (int h = params.h_min; h <= params.h_max; h += params.h_step)
            pts.push_back({h, std::log(knn_gmae(U, h, params))});
    }
    return pts;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;
};

LineFit least_squares_line(std::span<const CurvePoint> pts) {
    const double n = static_cast<double>(pts.size());
    double hm = 0.0, ym = 0.0;
    for (const auto& p : pts) {
        hm += p.h;
        ym += p.y;
    }
    hm /= n;
    ym /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : pts) {
        sxy += (p.h - hm) * (p.y - ym);
        sxx += (p.h - hm) * (p.h - hm);
    }
    LineFit f;
    f.slope = (sxx > 0.0) ? sxy / sxx : 0.0;
    f.intercept = ym - f.slope * hm;
    for (const auto& p : pts) {
        const double r = p.y - (f.slope * p.h + f.intercept);
        f.sse += r * r;
    }
    return f;
}

} // namespace

SlopeFit fit_best_slope(std::span<const CurvePoint> points, [[maybe_unused]] const LleParams& params) {
    if (points.size() < 2)
        throw insufficient_data_error("fit_best_slope: need at least 2 points");

    const LineFit one = least_squares_line(points);
    SlopeFit best;
    best.segments = 1;
    best.lambda1 = one.slope;
    best.sse = one.sse;

    const std::size_t n = points.size();
    bool have_two = false;
    double two_sse = 0.0;
    LineFit left_best, right_best;
    int split_h = 0;
    for (std::size_t i = 1; i + 2 < n; ++i) { // >= 2 points each side
        const LineFit l = least_squares_line(points.subspan(0, i + 1));
        const LineFit r = least_squares_line(points.subspan(i + 1));
        const double tot = l.sse + r.sse;
        // <= so an exact SSE tie keeps the longest first segment
        if (!have_two || tot <= two_sse) {
            have_two = true;
            two_sse = tot;
            left_best = l;
            right_best = r;
            split_h = points[i].h;
        }
    }

    // Two segments must beat the single line by at least 5% of its SSE,
    // otherwise five horizon points would nearly always split. A line that
    // already fits to rounding noise never splits.
    if (have_two && one.sse > 1e-18 && two_sse < 0.95 * one.sse) {
        best.segments = 2;
        best.lambda1 = left_best.slope;
        best.lambda2 = right_best.slope;
        best.h_split = split_h;
        best.sse = two_sse;
    }
    return best;
}

LyapunovProfile lyapunov_profile(const EnsembleMatrix& X, const LleParams& params) {
    params.validate();
    const int L = params.micro_len();
    if (L > X.n_iters)
        throw domain_error("lyapunov_profile: micro length exceeds series length");

    LyapunovProfile p;
    p.observable = X.observable;
    p.case_label = X.case_label;
    p.alpha = X.alpha;
    for (int t_end = L; t_end <= X.n_iters; ++t_end) {
        LleParams wp = params;
        wp.split_seed = detail::mix_seed(params.split_seed, static_cast<std::uint64_t>(t_end));
        const Batch b = make_batch(X, t_end, wp);
        const auto curve = log_gmae_curve(b, wp);
        p.entries.push_back({t_end, fit_best_slope(curve, wp)});
    }
    return p;
}

std::string profile_csv_name(const LyapunovProfile& p) {
    return "profile_case" + p.case_label + "_alpha" + format_double(p.alpha) + "_" +
           observable_tag(p.observable) + ".csv";
}

std::filesystem::path write_profile_csv(const LyapunovProfile& p,
                                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing", path.string());
    out << "t_end,lambda1,lambda2,h_split,segments,sse\n";
    for (const auto& e : p.entries) {
        out << e.t_end << ',' << format_double(e.fit.lambda1) << ',';
        if (e.fit.lambda2)
            out << format_double(*e.fit.lambda2);
        out << ',';
        if (e.fit.h_split)
            out << *e.fit.h_split;
        out << ',' << e.fit.segments << ',' << format_double(e.fit.sse) << '\n';
    }
    if (!out)
        throw io_error("write failed", path.string());
    return path;
}

LyapunovProfile read_profile_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open", path.string());
    std::string line;
    if (!std::getline(in, line))
        throw parse_error("empty profile file " + path.string());

    LyapunovProfile p;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (start <= line.size()) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                           : comma - start));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (fields.size() != 6)
            throw parse_error("bad profile row at " + path.string() + ":" + std::to_string(line_no));
        auto to_d = [&](const std::string& s) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size())
                throw parse_error("bad field at " + path.string() + ":" + std::to_string(line_no));
            return v;
        };
        ProfileEntry e;
        e.t_end = static_cast<int>(to_d(fields[0]));
        e.fit.lambda1 = to_d(fields[1]);
        if (!fields[2].empty())
            e.fit.lambda2 = to_d(fields[2]);
        if (!fields[3].empty())
            e.fit.h_split = static_cast<int>(to_d(fields[3]));
        e.fit.segments = static_cast<int>(to_d(fields[4]));
        e.fit.sse = to_d(fields[5]);
        p.entries.push_back(std::move(e));
    }

    // metadata back out of profile_case{c}_alpha{a}_{sk|rk}.csv
    const std::string stem = path.filename().string();
    const auto apos = stem.find("_alpha");
    const auto upos = stem.rfind('_');
    if (stem.rfind("profile_case", 0) == 0 && apos != std::string::npos && upos > apos) {
        p.case_label = stem.substr(12, apos - 12);
        const std::string tag = stem.substr(upos + 1, stem.size() - upos - 5);
        if (tag == "sk")
            p.observable = Observable::step_norm;
        else if (tag == "rk")
            p.observable = Observable::residual_norm;
        const std::string alpha_str = stem.substr(apos + 6, upos - apos - 6);
        double a = 0.0;
        auto [ptr, ec] = std::from_chars(alpha_str.data(), alpha_str.data() + alpha_str.size(), a);
        if (ec == std::errc())
            p.alpha = a;
    }
    return p;
}

std::filesystem::path write_fit_curve_csv(const EnsembleMatrix& X, const LleParams& params,
                                          const std::filesystem::path& path) {
    params.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing", path.string());
    out << "t_end,h,y,fit\n";
    const int L = params.micro_len();
    for (int t_end = L; t_end <= X.n_iters; ++t_end) {
        LleParams wp = params;
        wp.split_seed = detail::mix_seed(params.split_seed, static_cast<std::uint64_t>(t_end));
        const Batch b = make_batch(X, t_end, wp);
        const auto curve = log_gmae_curve(b, wp);
        const SlopeFit fit = fit_best_slope(curve, wp);

        // rebuild the per-segment intercepts for the plotted line
        std::vector<CurvePoint> left, right;
        for (const auto& p : curve) {
            if (fit.segments == 2 && p.h > *fit.h_split)
                right.push_back(p);
            else
                left.push_back(p);
        }
        const LineFit lf = least_squares_line(left);
        const LineFit rf = right.size() >= 2 ? least_squares_line(right) : lf;
        for (const auto& p : curve) {
            const bool on_right = fit.segments == 2 && p.h > *fit.h_split;
            const double fitted = on_right ? rf.slope * p.h + rf.intercept
                                           : lf.slope * p.h + lf.intercept;
            out << t_end << ',' << p.h << ',' << format_double(p.y) << ','
                << format_double(fitted) << '\n';
        }
    }
    if (!out)
        throw io_error("write failed", path.string());
    return path;
}

} // namespace invm
