#ifndef INVM_SOLVERS_HPP
#define INVM_SOLVERS_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "invm/polynomial.hpp"

namespace invm {

using ComplexVec = std::vector<Complex>;

enum class Method { WDK, NOUREIN, ZHM, INVM };

const char* method_name(Method m);
Method parse_method(std::string_view name);

struct SolverParams {
    double alpha = 3.0;          // tunable parameter of INVM^alpha
    double beta = 1.0;           // fractional order, (0,1]
    int max_iters = 50;
    double tol = 1e-12;          // residual-norm stopping threshold
    double divergence_cap = 1e12;

    void validate() const;       // throws domain_error on a bad field
};

enum class SolverStatus { converged, max_iters_reached, diverged };

const char* status_name(SolverStatus s);

struct SolverTrace {
    std::vector<ComplexVec> iterates;   // x^[0] .. x^[iterations_used]
    std::vector<double> step_norms;     // s_k = ||x^[k+1] - x^[k]||_2
    std::vector<double> residual_norms; // r_k = ||f(x^[k])||_2
    SolverStatus status = SolverStatus::max_iters_reached;
    int iterations_used = 0;
};

// One Weierstrass-Durand-Kerner step:
//   x_i' = x_i - f(x_i) / prod_{j != i} (x_i - x_j).
ComplexVec wdk_step(const Polynomial& f, std::span<const Complex> x);

// Weierstrass correction P(x_i) = f(x_i) / prod_{j != i}(x_i - x_j).
ComplexVec weierstrass_corrections(const Polynomial& f, std::span<const Complex> x);

// Nourein's third-order step.
ComplexVec nourein_step(const Polynomial& f, std::span<const Complex> x);

// Zhang's fifth-order step (ZHM).
ComplexVec zhm_step(const Polynomial& f, std::span<const Complex> x);

// The fractional substeps feeding INVM^alpha:
//   y_j = x_j - [G(b+1) f(x_j)/D^C f(x_j)]^{1/b}
//   z_j = y_j - [G(b+1) f(y_j)/D^C f(x_j) * (1 + 2u/(1 + alpha*u))]^{1/b},
//         u = f(y_j)/f(x_j).
// If |f(y_j)| falls below the residual floor the root is already found and
// z_j = y_j. A vanishing D^C f(x_j) throws degenerate_derivative_error.
std::pair<ComplexVec, ComplexVec>
invm_substeps(const Polynomial& f, std::span<const Complex> x, const SolverParams& params);

// One INVM^alpha iteration: z from invm_substeps, then
//   x_i' = x_i - P*(x_i),  P*(x_i) = f(x_i) / prod_{j != i}(x_i - z_j).
ComplexVec invm_step(const Polynomial& f, std::span<const Complex> x, const SolverParams& params);

// The two printed algebraic forms of the inverse update, kept for the
// equivalence contract (both reduce to x_i^2 / (x_i + P*)):
//   rational: x_i^2 prod(x_i - z_j) / (x_i prod(x_i - z_j) + f(x_i))
//   compact:  x_i - P*(x_i) / (1 + P*(x_i)/x_i)
// The compact form divides by x_i; a component at the zero floor is shifted
// along its phase before use.
ComplexVec invm_step_rational(const Polynomial& f, std::span<const Complex> x, const SolverParams& params);
ComplexVec invm_step_compact(const Polynomial& f, std::span<const Complex> x, const SolverParams& params);

// Iterates `method` from x0. Each iteration k records r_k at the current
// iterate and s_k for the step leaving it. With early_stop, iteration ends
// once r_k <= tol (converged) or an iterate component exceeds the
// divergence cap / goes non-finite (diverged). Without early_stop exactly
// max_iters rows are produced; once a run diverges the remaining norms are
// held at the cap so downstream matrices stay finite.
SolverTrace run_solver(const Polynomial& f, std::span<const Complex> x0,
                       const SolverParams& params, Method method,
                       bool early_stop = true);

// Three-term estimate ln(e_k/e_{k-1}) / ln(e_{k-1}/e_{k-2}) over the last
// three admissible entries (finite and above the precision floor), which
// must be strictly decreasing; otherwise insufficient_data_error. Callers
// measuring binary64 solver output should raise the floor to ~1e-13 so
// rounding-dominated tail values are not treated as signal.
double computational_order(std::span<const double> errors, double precision_floor = 1e-300);

double vec_norm(std::span<const Complex> v);      // Euclidean
double residual_norm(const Polynomial& f, std::span<const Complex> x);

} // namespace invm

#endif
