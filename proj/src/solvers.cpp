#include "invm/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "invm/errors.hpp"

namespace invm {

namespace {

constexpr double kFloorCoeff = 1e-13;   // separation floor scale
constexpr double kResidualFloor = 1e-300; // |f(y)| below this means the root is hit

double separation_floor(std::span<const Complex> x) {
    double m = 0.0;
    for (const auto& xi : x)
        m = std::max(m, std::abs(xi));
    return kFloorCoeff * (1.0 + m);
}

// Perturb a below-floor denominator along its phase (phase 0 at exact zero);
// one retry, then degenerate input.
Complex guard_denominator(Complex d, double floor_value) {
    if (!(std::abs(d) < floor_value))
        return d;
    const Complex dir = (d == Complex(0.0)) ? Complex(1.0) : d / std::abs(d);
    d += floor_value * dir;
    if (std::abs(d) < floor_value)
        throw degenerate_input_error("denominator below separation floor after perturbation");
    return d;
}

void check_dimensions(const Polynomial& f, std::span<const Complex> x) {
    if (static_cast<int>(x.size()) != f.degree())
        throw domain_error("approximation vector length must equal the polynomial degree");
}

} // namespace

const char* method_name(Method m) {
    switch (m) {
    case Method::WDK: return "WDK";
    case Method::NOUREIN: return "NOUREIN";
    case Method::ZHM: return "ZHM";
    case Method::INVM: return "INVM";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string u(name);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "WDK") return Method::WDK;
    if (u == "NOUREIN") return Method::NOUREIN;
    if (u == "ZHM") return Method::ZHM;
    if (u == "INVM") return Method::INVM;
    throw domain_error("unknown method '" + std::string(name) + "'");
}

void SolverParams::validate() const {
    if (!(beta > 0.0) || beta > 1.0)
        throw domain_error("SolverParams: beta must lie in (0,1]");
    if (max_iters < 1)
        throw domain_error("SolverParams: max_iters must be >= 1");
    if (!(tol > 0.0))
        throw domain_error("SolverParams: tol must be positive");
    if (!(divergence_cap > tol))
        throw domain_error("SolverParams: divergence_cap must exceed tol");
    if (!std::isfinite(alpha))
        throw domain_error("SolverParams: alpha must be finite");
}

const char* status_name(SolverStatus s) {
    switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iters_reached: return "max_iters_reached";
    case SolverStatus::diverged: return "diverged";
    }
    return "?";
}

double vec_norm(std::span<const Complex> v) {
    double s = 0.0;
    for (const auto& c : v)
        s += std::norm(c);
    return std::sqrt(s);
}

double residual_norm(const Polynomial& f, std::span<const Complex> x) {
    double s = 0.0;
    for (const auto& xi : x)
        s += std::norm(f.eval(xi));
    return std::sqrt(s);
}

ComplexVec weierstrass_corrections(const Polynomial& f, std::span<const Complex> x) {
    check_dimensions(f, x);
    const std::size_t n = x.size();
    const double floor_value = separation_floor(x);
    ComplexVec p(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex prod(1.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                prod *= guard_denominator(x[i] - x[j], floor_value);
        p[i] = f.eval(x[i]) / prod;
    }
    return p;
}

ComplexVec wdk_step(const Polynomial& f, std::span<const Complex> x) {
    ComplexVec p = weierstrass_corrections(f, x);
    ComplexVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] - p[i];
    return out;
}

ComplexVec nourein_step(const Polynomial& f, std::span<const Complex> x) {
    const std::size_t n = x.size();
    const double floor_value = separation_floor(x);
    ComplexVec p = weierstrass_corrections(f, x);
    ComplexVec out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex sum(0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                sum += p[j] / guard_denominator(x[i] - p[j] - x[j], floor_value);
        out[i] = x[i] - p[i] / guard_denominator(Complex(1.0) + sum, floor_value);
    }
    return out;
}

ComplexVec zhm_step(const Polynomial& f, std::span<const Complex> x) {
    const std::size_t n = x.size();
    const double floor_value = separation_floor(x);
    ComplexVec p = weierstrass_corrections(f, x);
    ComplexVec out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex diff_sum(0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                diff_sum += x[i] - x[j];
        const Complex g = p[i] / guard_denominator(diff_sum, floor_value);

        Complex pair_sum(0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                pair_sum += p[j] / (guard_denominator(x[i] - x[j], floor_value) *
                                    guard_denominator(x[i] - p[j] - x[j], floor_value));

        const Complex k = Complex(1.0) + g * g + 4.0 * p[i] * pair_sum;
        const Complex denom = Complex(1.0) + g + principal_power(k, 0.5);
        // numerator 2P: the denominator tends to 2 near a root, so the plain
        // P numerator would take half-Weierstrass steps (linear, rate 1/2)
        out[i] = x[i] - 2.0 * p[i] / guard_denominator(denom, floor_value);
    }
    return out;
}

namespace {

// Same perturbation policy as guard_denominator, but a derivative that
// cannot be lifted above the floor reports as degenerate_derivative_error.
Complex guard_derivative(Complex d, double floor_value) {
    if (!(std::abs(d) < floor_value))
        return d;
    const Complex dir = (d == Complex(0.0)) ? Complex(1.0) : d / std::abs(d);
    d += floor_value * dir;
    if (std::abs(d) < floor_value)
        throw degenerate_derivative_error("fractional derivative at the separation floor");
    return d;
}

} // namespace

std::pair<ComplexVec, ComplexVec>
invm_substeps(const Polynomial& f, std::span<const Complex> x, const SolverParams& params) {
    check_dimensions(f, x);
    params.validate();
    const std::size_t n = x.size();
    const double floor_value = separation_floor(x);
    const double gb = gamma_fn(params.beta + 1.0);
    const double inv_beta = 1.0 / params.beta;

    ComplexVec y(n), z(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex dc = guard_derivative(f.caputo(params.beta, x[j]), floor_value);
        const Complex fx = f.eval(x[j]);
        y[j] = x[j] - principal_power(gb * fx / dc, inv_beta);

        const Complex fy = f.eval(y[j]);
        if (std::abs(fy) < kResidualFloor || fx == Complex(0.0)) {
            z[j] = y[j]; // root already found to machine precision
            continue;
        }
        const Complex u = fy / fx;
        const Complex du = guard_denominator(Complex(1.0) + params.alpha * u, floor_value);
        const Complex factor = Complex(1.0) + 2.0 * u / du;
        z[j] = y[j] - principal_power(gb * fy / dc * factor, inv_beta);
    }
    return {std::move(y), std::move(z)};
}

namespace {

// prod_{j != i} (x_i - z_j), denominators guarded.
ComplexVec offset_products(std::span<const Complex> x, std::span<const Complex> z,
                           double floor_value) {
    const std::size_t n = x.size();
    ComplexVec prods(n, Complex(1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                prods[i] *= guard_denominator(x[i] - z[j], floor_value);
    return prods;
}

} // namespace

ComplexVec invm_step(const Polynomial& f, std::span<const Complex> x, const SolverParams& params) {
    const auto [y, z] = invm_substeps(f, x, params);
    const double floor_value = separation_floor(x);
    const ComplexVec prods = offset_products(x, z, floor_value);
    ComplexVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] - f.eval(x[i]) / prods[i];
    return out;
}

ComplexVec invm_step_rational(const Polynomial& f, std::span<const Complex> x,
                              const SolverParams& params) {
    const auto [y, z] = invm_substeps(f, x, params);
    const double floor_value = separation_floor(x);
    const ComplexVec prods = offset_products(x, z, floor_value);
    ComplexVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Complex num = x[i] * x[i] * prods[i];
        const Complex den = guard_denominator(x[i] * prods[i] + f.eval(x[i]), floor_value);
        out[i] = num / den;
    }
    return out;
}

ComplexVec invm_step_compact(const Polynomial& f, std::span<const Complex> x,
                             const SolverParams& params) {
    const auto [y, z] = invm_substeps(f, x, params);
    const double floor_value = separation_floor(x);
    const ComplexVec prods = offset_products(x, z, floor_value);
    ComplexVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Complex xi = guard_denominator(x[i], floor_value); // zero-floor shift
        const Complex pstar = f.eval(x[i]) / prods[i];
        out[i] = xi - pstar / guard_denominator(Complex(1.0) + pstar / xi, floor_value);
    }
    return out;
}

SolverTrace run_solver(const Polynomial& f, std::span<const Complex> x0,
                       const SolverParams& params, Method method, bool early_stop) {
    check_dimensions(f, x0);
    params.validate();
    for (const auto& c : x0)
        if (!is_finite(c))
            throw domain_error("run_solver: non-finite initial approximation");

    const double cap = params.divergence_cap;
    auto capped = [cap](double v) { return std::isfinite(v) ? std::min(v, cap) : cap; };

    SolverTrace trace;
    trace.iterates.emplace_back(x0.begin(), x0.end());
    ComplexVec x(x0.begin(), x0.end());

    for (int k = 0; k < params.max_iters; ++k) {
        const double rk = capped(residual_norm(f, x));

        ComplexVec xn;
        bool step_failed = false;
        try {
            switch (method) {
            case Method::WDK: xn = wdk_step(f, x); break;
            case Method::NOUREIN: xn = nourein_step(f, x); break;
            case Method::ZHM: xn = zhm_step(f, x); break;
            case Method::INVM: xn = invm_step(f, x, params); break;
            }
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
            if (!early_stop) {
                // hold remaining rows at the cap so downstream matrices stay finite
                for (int kk = k + 1; kk < params.max_iters; ++kk) {
                    trace.step_norms.push_back(cap);
                    trace.residual_norms.push_back(cap);
                }
                trace.iterations_used = params.max_iters;
            }
            return trace;
        }

        x = std::move(xn);
        trace.iterates.push_back(x);

        if (early_stop && rk <= params.tol) {
            trace.status = SolverStatus::converged;
            return trace;
        }
    }

    // Label a full-length run by its final residual so no-early-stop runs
    // still report convergence meaningfully.
    if (!trace.residual_norms.empty() && trace.residual_norms.back() <= params.tol)
        trace.status = early_stop ? SolverStatus::max_iters_reached : SolverStatus::converged;
    else
        trace.status = SolverStatus::max_iters_reached;
    return trace;
}

double computational_order(std::span<const double> errors, double precision_floor) {
    if (!(precision_floor > 0.0))
        throw domain_error("computational_order: precision floor must be positive");
    std::vector<double> admissible;
    for (double e : errors)
        if (std::isfinite(e) && e > precision_floor)
            admissible.push_back(e);
    if (admissible.size() < 3)
        throw insufficient_data_error("computational_order: fewer than three admissible entries");
    const double a = admissible[admissible.size() - 3];
    const double b = admissible[admissible.size() - 2];
    const double c = admissible[admissible.size() - 1];
    if (!(a > b && b > c))
        throw insufficient_data_error("computational_order: entries are not strictly decreasing");
    return std::log(c / b) / std::log(b / a);
}

} // namespace invm
