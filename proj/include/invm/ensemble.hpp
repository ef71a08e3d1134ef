#ifndef INVM_ENSEMBLE_HPP
#define INVM_ENSEMBLE_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "invm/solvers.hpp"

namespace invm {

enum class Observable { step_norm, residual_norm };

const char* observable_tag(Observable o); // "sk" / "rk"

struct EnsembleConfig {
    ComplexVec base_vector;
    int n_runs = 1000;
    int n_iters = 50;
    double jitter_frac = 0.01;
    std::vector<double> alphas{0, 1, 2, 3, 4, 5};
    double beta = 1.0;
    std::uint64_t master_seed = 1;
    std::string case_label = "1";

    void validate() const;
};

// Row-major n_runs x n_iters matrix of one observable for one (case, alpha).
struct EnsembleMatrix {
    std::vector<double> values;
    int n_runs = 0;
    int n_iters = 0;
    Observable observable = Observable::step_norm;
    std::string case_label;
    double alpha = 0.0;

    double& at(int run, int iter) { return values[static_cast<std::size_t>(run) * n_iters + iter]; }
    double at(int run, int iter) const { return values[static_cast<std::size_t>(run) * n_iters + iter]; }
};

// Perturbed initial vectors x0_j = base + delta * v_j with ||v_j||_2 = 1 and
// delta = jitter_frac * ||base||_2. The direction is 2d standard normals
// viewed as d complex components, normalized. Deterministic in
// (master_seed, case_label, run index); the same initials serve every alpha.
std::vector<ComplexVec> generate_initials(const EnsembleConfig& config);

// Runs INVM^alpha for n_iters iterations (no early stopping) from every
// initial vector; row j of S holds s_{j,0..}, row j of R holds r_{j,0..}.
// Diverged runs are held at the divergence cap per the solver policy.
std::pair<EnsembleMatrix, EnsembleMatrix>
run_ensemble(const Polynomial& f, const EnsembleConfig& config, double alpha);

// case{label}_alpha{alpha}_{sk|rk}.csv in `directory`: no header, one run
// per line, shortest round-trip decimal values. Returns the file path.
std::filesystem::path write_matrix_csv(const EnsembleMatrix& m, const std::filesystem::path& directory);

// No header; one row per run: re_1,im_1,...,re_d,im_d.
std::filesystem::path write_initials_csv(const std::vector<ComplexVec>& vectors,
                                         const std::filesystem::path& path);

std::vector<ComplexVec> read_initials_csv(const std::filesystem::path& path);

// Dimensions inferred from the content; observable/case/alpha parsed from
// the filename when it matches the naming convention. Ragged or
// non-numeric content throws parse_error with the line number.
EnsembleMatrix read_matrix_csv(const std::filesystem::path& path);

std::string matrix_csv_name(const EnsembleMatrix& m);

namespace detail {

// splitmix64-based combiner for deriving sub-stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Scheduling-independent stream seed for one run.
std::uint64_t run_stream_seed(std::uint64_t master_seed, std::string_view case_label, int run_index);

// Standard normal via Box-Muller over mt19937_64 output; hand-rolled so the
// byte stream does not depend on the standard library implementation.
class NormalSampler {
  public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
    double next();

  private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace detail

} // namespace invm

#endif
