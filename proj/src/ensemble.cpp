#include "invm/ensemble.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>

#include "invm/errors.hpp"

namespace invm {

const char* observable_tag(Observable o) {
    return o == Observable::step_norm ? "sk" : "rk";
}

void EnsembleConfig::validate() const {
    if (base_vector.empty())
        throw domain_error("EnsembleConfig: empty base vector");
    if (n_runs < 1)
        throw domain_error("EnsembleConfig: n_runs must be >= 1");
    if (n_iters < 1)
        throw domain_error("EnsembleConfig: n_iters must be >= 1");
    if (!(jitter_frac >= 0.0))
        throw domain_error("EnsembleConfig: jitter_frac must be >= 0");
    if (case_label.empty())
        throw domain_error("EnsembleConfig: empty case label");
}

namespace detail {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ b);
}

std::uint64_t run_stream_seed(std::uint64_t master_seed, std::string_view case_label, int run_index) {
    std::uint64_t s = splitmix64(master_seed);
    s = splitmix64(s ^ fnv1a(case_label));
    s = splitmix64(s ^ static_cast<std::uint64_t>(run_index));
    return s;
}

double NormalSampler::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller over explicitly constructed uniforms; mt19937_64 output is
    // pinned by the standard, so the stream is identical everywhere.
    const double u1 = 1.0 - static_cast<double>(rng_() >> 11) * 0x1.0p-53; // (0,1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;      // [0,1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

} // namespace detail

std::vector<ComplexVec> generate_initials(const EnsembleConfig& config) {
    config.validate();
    const std::size_t d = config.base_vector.size();
    const double delta = config.jitter_frac * vec_norm(config.base_vector);

    std::vector<ComplexVec> out(static_cast<std::size_t>(config.n_runs));
    for (int j = 0; j < config.n_runs; ++j) {
        detail::NormalSampler sampler(
            detail::run_stream_seed(config.master_seed, config.case_label, j));
        ComplexVec v(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double re = sampler.next();
            const double im = sampler.next();
            v[i] = Complex(re, im);
        }
        double norm = vec_norm(v);
        if (norm == 0.0) {
            v[0] = Complex(1.0);
            norm = 1.0;
        }
        ComplexVec x0(config.base_vector);
        for (std::size_t i = 0; i < d; ++i)
            x0[i] += delta * (v[i] / norm);
        out[static_cast<std::size_t>(j)] = std::move(x0);
    }
    return out;
}

std::pair<EnsembleMatrix, EnsembleMatrix>
run_ensemble(const Polynomial& f, const EnsembleConfig& config, double alpha) {
    config.validate();
    if (static_cast<int>(config.base_vector.size()) != f.degree())
        throw domain_error("run_ensemble: base vector length must equal the polynomial degree");

    const auto initials = generate_initials(config);

    EnsembleMatrix S, R;
    S.n_runs = R.n_runs = config.n_runs;
    S.n_iters = R.n_iters = config.n_iters;
    S.case_label = R.case_label = config.case_label;
    S.alpha = R.alpha = alpha;
    S.observable = Observable::step_norm;
    R.observable = Observable::residual_norm;
    S.values.resize(static_cast<std::size_t>(config.n_runs) * config.n_iters);
    R.values.resize(S.values.size());

    SolverParams params;
    params.alpha = alpha;
    params.beta = config.beta;
    params.max_iters = config.n_iters;

    auto worker = [&](int lo, int hi) {
        for (int j = lo; j < hi; ++j) {
            SolverTrace t = run_solver(f, initials[static_cast<std::size_t>(j)], params,
                                       Method::INVM, /*early_stop=*/false);
            for (int k = 0; k < config.n_iters; ++k) {
                S.at(j, k) = t.step_norms[static_cast<std::size_t>(k)];
                R.at(j, k) = t.residual_norms[static_cast<std::size_t>(k)];
            }
        }
    };

    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int n_threads = std::clamp(hw, 1, config.n_runs);
    if (n_threads <= 1 || config.n_runs < 32) {
        worker(0, config.n_runs);
    } else {
        const int chunk = (config.n_runs + n_threads - 1) / n_threads;
        std::vector<std::future<void>> futs;
        for (int lo = 0; lo < config.n_runs; lo += chunk)
            futs.push_back(std::async(std::launch::async, worker, lo,
                                      std::min(lo + chunk, config.n_runs)));
        for (auto& fut : futs)
            fut.get();
    }
    return {std::move(S), std::move(R)};
}

std::string matrix_csv_name(const EnsembleMatrix& m) {
    return "case" + m.case_label + "_alpha" + format_double(m.alpha) + "_" +
           observable_tag(m.observable) + ".csv";
}

std::filesystem::path write_matrix_csv(const EnsembleMatrix& m,
                                       const std::filesystem::path& directory) {
    const auto path = directory / matrix_csv_name(m);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing", path.string());
    std::string line;
    for (int j = 0; j < m.n_runs; ++j) {
        line.clear();
        for (int k = 0; k < m.n_iters; ++k) {
            if (k)
                line += ',';
            line += format_double(m.at(j, k));
        }
        line += '\n';
        out << line;
    }
    if (!out)
        throw io_error("write failed", path.string());
    return path;
}

std::filesystem::path write_initials_csv(const std::vector<ComplexVec>& vectors,
                                         const std::filesystem::path& path) {
    if (!vectors.empty())
        for (const auto& v : vectors)
            if (v.size() != vectors.front().size())
                throw domain_error("write_initials_csv: vectors of differing length");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing", path.string());
    std::string line;
    for (const auto& v : vectors) {
        line.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i)
                line += ',';
            line += format_double(v[i].real());
            line += ',';
            line += format_double(v[i].imag());
        }
        line += '\n';
        out << line;
    }
    if (!out)
        throw io_error("write failed", path.string());
    return path;
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, int line_no, const std::string& path) {
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(p, end, v);
        if (ec != std::errc())
            throw parse_error("non-numeric field at " + path + ":" + std::to_string(line_no));
        row.push_back(v);
        p = ptr;
        if (p == end)
            break;
        if (*p != ',')
            throw parse_error("expected ',' at " + path + ":" + std::to_string(line_no));
        ++p;
    }
    return row;
}

} // namespace

EnsembleMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open", path.string());

    EnsembleMatrix m;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto row = parse_csv_row(line, line_no, path.string());
        if (m.n_iters == 0)
            m.n_iters = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != m.n_iters)
            throw parse_error("ragged row at " + path.string() + ":" + std::to_string(line_no));
        m.values.insert(m.values.end(), row.begin(), row.end());
        ++m.n_runs;
    }
    if (m.n_runs == 0)
        throw parse_error("empty matrix file " + path.string());

    // metadata from case{c}_alpha{a}_{sk|rk}.csv when the name matches
    const std::string stem = path.filename().string();
    const auto apos = stem.find("_alpha");
    const auto upos = stem.rfind('_');
    if (stem.rfind("case", 0) == 0 && apos != std::string::npos && upos > apos &&
        stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") {
        const std::string tag = stem.substr(upos + 1, stem.size() - upos - 5);
        if (tag == "sk" || tag == "rk") {
            m.case_label = stem.substr(4, apos - 4);
            const std::string alpha_str = stem.substr(apos + 6, upos - apos - 6);
            double a = 0.0;
            auto [ptr, ec] = std::from_chars(alpha_str.data(), alpha_str.data() + alpha_str.size(), a);
            if (ec == std::errc() && ptr == alpha_str.data() + alpha_str.size()) {
                m.alpha = a;
                m.observable = (tag == "sk") ? Observable::step_norm : Observable::residual_norm;
            }
        }
    }
    return m;
}

std::vector<ComplexVec> read_initials_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open", path.string());
    std::vector<ComplexVec> out;
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto row = parse_csv_row(line, line_no, path.string());
        if (row.size() % 2 != 0)
            throw parse_error("odd column count at " + path.string() + ":" + std::to_string(line_no));
        if (width == 0)
            width = row.size();
        else if (row.size() != width)
            throw parse_error("ragged row at " + path.string() + ":" + std::to_string(line_no));
        ComplexVec v(row.size() / 2);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = Complex(row[2 * i], row[2 * i + 1]);
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace invm
