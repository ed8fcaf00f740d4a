#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "ergon/gates.hpp"
#include "ergon/spectra.hpp"

// Resource measures (mean energy, capacity complement, relative entropy of
// coherence), per-gate resource generation, and the evaluable lower/upper
// bounds on what a battery must supply to implement a gate within error eps.

namespace ergon {

enum class MeasureKind { energy, capacity_complement, rel_entropy_coherence };

inline std::string measure_name(MeasureKind k) {
    switch (k) {
        case MeasureKind::energy: return "energy";
        case MeasureKind::capacity_complement: return "capacityComplement";
        case MeasureKind::rel_entropy_coherence: return "relEntropyCoherence";
    }
    return "?";
}

namespace detail {

inline double entropy_bits(const Eigen::VectorXd& probs) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = probs(i);
        if (p > 1e-300) s -= p * std::log2(p);
    }
    return s;
}

}  // namespace detail

// Relative entropy of coherence in the energy eigenbasis, in bits:
// C(rho) = S(rho_diag) - S(rho).
inline double coherence_of_state(const Matrix& rho) {
    validate_density(rho);
    Eigen::VectorXd diag(rho.rows());
    for (Eigen::Index i = 0; i < rho.rows(); ++i) diag(i) = std::max(0.0, rho(i, i).real());
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    Eigen::VectorXd eig = es.eigenvalues().cwiseMax(0.0);
    return detail::entropy_bits(diag) - detail::entropy_bits(eig);
}

// A monotone, additive resource measure with its regularity constants
// (Lipschitz constant K and offset c).
struct ResourceMeasure {
    MeasureKind kind = MeasureKind::energy;
    std::vector<int> energies;  // context for the two energy-type measures
    int dim = 0;
    double lipschitz = 0.0;
    double regularity_offset = 0.0;
    bool additive = true;

    double eval(const Matrix& rho) const {
        validate_density(rho);
        if (rho.rows() != dim) throw std::invalid_argument("ResourceMeasure: dimension mismatch");
        switch (kind) {
            case MeasureKind::energy: {
                double m = 0.0;
                for (int i = 0; i < dim; ++i)
                    m += rho(i, i).real() * energies[static_cast<std::size_t>(i)];
                return m;
            }
            case MeasureKind::capacity_complement: {
                const int top = *std::max_element(energies.begin(), energies.end());
                double m = 0.0;
                for (int i = 0; i < dim; ++i)
                    m += rho(i, i).real() * (top - energies[static_cast<std::size_t>(i)]);
                return m;
            }
            case MeasureKind::rel_entropy_coherence: return coherence_of_state(rho);
        }
        return 0.0;
    }

    static ResourceMeasure energy(const SystemSpec& s) {
        return {MeasureKind::energy, s.energies, s.dim, static_cast<double>(s.norm()), 0.0, true};
    }
    static ResourceMeasure energy(const BatterySim& b) {
        std::vector<int> e(static_cast<std::size_t>(b.levels()));
        std::iota(e.begin(), e.end(), 0);
        return {MeasureKind::energy, std::move(e), b.levels(), static_cast<double>(b.capacity), 0.0, true};
    }
    static ResourceMeasure capacity_complement(const SystemSpec& s) {
        return {MeasureKind::capacity_complement, s.energies, s.dim, static_cast<double>(s.norm()), 0.0,
                true};
    }
    static ResourceMeasure coherence(int dim) {
        return {MeasureKind::rel_entropy_coherence, {}, dim, std::log2(static_cast<double>(dim)), 2.0, true};
    }
};

// Delta_G H_S = G+ H_S G - H_S with its extreme eigenvalues. M(G) is the
// largest energy gain the gate can produce, M(G+) the largest loss.
struct GateResourceProfile {
    Matrix delta;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double m_of_g = 0.0;
    double m_of_gdag = 0.0;
    double spread() const { return lambda_max - lambda_min; }
};

inline GateResourceProfile gate_profile(const Matrix& g, const SystemSpec& system) {
    if (!is_unitary(g)) throw std::invalid_argument("gate_profile: gate is not unitary");
    if (g.rows() != system.dim) throw std::invalid_argument("gate_profile: dimension mismatch");
    Matrix h = Matrix::Zero(system.dim, system.dim);
    for (int x = 0; x < system.dim; ++x) h(x, x) = system.energies[static_cast<std::size_t>(x)];
    GateResourceProfile p;
    p.delta = g.adjoint() * h * g - h;
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.delta, Eigen::EigenvaluesOnly);
    p.lambda_max = es.eigenvalues().maxCoeff();
    p.lambda_min = es.eigenvalues().minCoeff();
    p.m_of_g = p.lambda_max;
    p.m_of_gdag = -p.lambda_min;
    return p;
}

struct CorollaryBound {
    double closed_form = 0.0;   // (Mg+Mgd)^2 / (32 K sqrt(eps)) - c - 2 K sqrt(eps)
    double integer_max = 0.0;   // max_m m (Mg+Mgd) - 8 sqrt(eps) K m^2, minus c
    long m_star = 0;
};

// Battery resource requirement from the additive-measure corollary. Returns
// both the closed form and the exact integer maximization; they differ by at
// most 2 K sqrt(eps).
inline CorollaryBound corollary_bound(double m_g, double m_gdag, double k, double c, double eps) {
    if (k <= 0.0) throw std::invalid_argument("corollary_bound: K must be positive");
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("corollary_bound: eps outside [0,1]");
    CorollaryBound out;
    if (eps == 0.0) {
        const double inf = std::numeric_limits<double>::infinity();
        const double s = m_g + m_gdag;
        out.closed_form = s > 0.0 ? inf : -c;
        out.integer_max = out.closed_form;
        out.m_star = s > 0.0 ? std::numeric_limits<long>::max() : 0;
        return out;
    }
    const double sqrt_eps = std::sqrt(eps);
    const double s = m_g + m_gdag;
    out.closed_form = s * s / (32.0 * k * sqrt_eps) - c - 2.0 * k * sqrt_eps;
    const double m_real = s / (16.0 * sqrt_eps * k);
    const auto value = [&](long m) { return m * s - 8.0 * sqrt_eps * k * static_cast<double>(m) * m; };
    long best = 0;
    for (long cand : {static_cast<long>(std::floor(m_real)), static_cast<long>(std::ceil(m_real))}) {
        if (cand < 0) cand = 0;
        if (value(cand) > value(best)) best = cand;
    }
    out.m_star = best;
    out.integer_max = value(best) - c;
    return out;
}

// Mean-energy lower bound for implementing G within worst-case infidelity
// eps: spread^2 / (32 sqrt(eps) |H_S|) - 2 |H_S| sqrt(eps), clamped at 0.
inline double energy_lower_bound(const Matrix& g, const SystemSpec& system, double eps) {
    if (system.norm() == 0) return 0.0;  // fully degenerate Hamiltonian carries no requirement
    const GateResourceProfile p = gate_profile(g, system);
    const CorollaryBound b =
        corollary_bound(p.m_of_g, p.m_of_gdag, static_cast<double>(system.norm()), 0.0, eps);
    return std::max(0.0, b.closed_form);
}

// Battery capacity lower bound at the worst-case gate: the mean-energy bound
// plus the capacity-complement bound, |H_S|/(4 sqrt(eps)) - 4 |H_S| sqrt(eps).
inline double capacity_lower_bound(const SystemSpec& system, double eps) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("capacity_lower_bound: eps outside (0,1]");
    const double s = system.norm();
    if (s == 0.0) return 0.0;
    const double sqrt_eps = std::sqrt(eps);
    return std::max(0.0, s / (4.0 * sqrt_eps) - 4.0 * s * sqrt_eps);
}

struct AchievableEnergy {
    double mean = 0.0;      // pi spread / (4 sqrt(eps))
    double capacity = 0.0;  // 2 * mean, since <H_B> = |H_B| / 2 for the sine state
    long R = 3;             // battery parameter achieving the target error
};

inline AchievableEnergy achievable_energy(const Matrix& g, const SystemSpec& system, double eps) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("achievable_energy: eps outside (0,1]");
    if (!system.uniform)
        throw std::invalid_argument("achievable_energy: requires an equally spaced spectrum");
    const GateResourceProfile p = gate_profile(g, system);
    AchievableEnergy a;
    if (p.spread() <= 1e-14) {
        a.R = 3;  // conservative gate: exact at the minimal battery
        a.mean = 0.0;
        a.capacity = 0.0;
        return a;
    }
    const double pi = std::numbers::pi;
    a.mean = pi * p.spread() / (4.0 * std::sqrt(eps));
    a.capacity = 2.0 * a.mean;
    a.R = std::max<long>(
        3, static_cast<long>(std::ceil(pi * p.spread() / (2.0 * std::sqrt(eps) * system.norm()))));
    return a;
}

// Gate-resolved coherence requirement, (C(G)+C(G+))^2/(32 sqrt(eps) log d) - 2.
inline double coherence_bound(double c_g, double c_gdag, int d_s, double eps) {
    if (d_s < 2) throw std::invalid_argument("coherence_bound: need d_S >= 2");
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("coherence_bound: eps outside (0,1]");
    const double sum = c_g + c_gdag;
    return sum * sum / (32.0 * std::sqrt(eps) * std::log2(static_cast<double>(d_s))) - 2.0;
}

// Universal variant: log d / (8 sqrt(eps)) - 2 bits for any processor able to
// reach error eps on every gate.
inline double universal_coherence_bound(int d_s, double eps) {
    if (d_s < 2) throw std::invalid_argument("universal_coherence_bound: need d_S >= 2");
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("universal_coherence_bound: eps outside (0,1]");
    return std::log2(static_cast<double>(d_s)) / (8.0 * std::sqrt(eps)) - 2.0;
}

// Sampled lower estimate of the coherence generated by G: max over random
// pure inputs (plus the computational basis) of C(G rho G+) - C(rho), refined
// by local ascent. Not a certificate.
inline double coherence_generation_estimate(const Matrix& g, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("coherence_generation_estimate: need trials >= 1");
    if (!is_unitary(g)) throw std::invalid_argument("coherence_generation_estimate: gate is not unitary");
    const int d = static_cast<int>(g.rows());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto gain = [&](const Vector& psi) {
        const Matrix rho = psi * psi.adjoint();
        const Matrix out = g * rho * g.adjoint();
        return coherence_of_state(out) - coherence_of_state(rho);
    };

    double best = 0.0;
    Vector best_psi = Vector::Unit(d, 0);
    for (int x = 0; x < d; ++x) {
        const Vector psi = Vector::Unit(d, x);
        const double v = gain(psi);
        if (v > best) {
            best = v;
            best_psi = psi;
        }
    }
    for (int tr = 0; tr < trials; ++tr) {
        const Vector psi = haar_state(d, rng);
        const double v = gain(psi);
        if (v > best) {
            best = v;
            best_psi = psi;
        }
    }
    // local ascent around the best start
    double step = 0.2;
    Vector psi = best_psi;
    for (int it = 0; it < 200 && step > 1e-8; ++it) {
        Vector cand(d);
        for (int i = 0; i < d; ++i) cand(i) = psi(i) + step * Complex(gauss(rng), gauss(rng));
        cand.normalize();
        const double v = gain(cand);
        if (v > best) {
            best = v;
            psi = cand;
        } else {
            step *= 0.8;
        }
    }
    return best;
}

// Circuit energy budget: N gates each powered by a fresh battery versus one
// recycled battery for the whole computation.
struct BudgetComparison {
    double multi_lower = 0.0;   // N^{3/2} |H_gate| / (8 sqrt(delta))
    double single_upper = 0.0;  // pi n / (2 sqrt(delta))
    std::string assumptions;
};

inline BudgetComparison budget_comparison(long n_gates, int n_qubits, double delta,
                                          double gate_norm = 1.0) {
    if (n_gates < 1) throw std::invalid_argument("budget_comparison: need N >= 1");
    if (delta <= 0.0 || delta > 1.0) throw std::invalid_argument("budget_comparison: delta outside (0,1]");
    BudgetComparison b;
    const double n32 = std::pow(static_cast<double>(n_gates), 1.5);
    b.multi_lower = n32 * gate_norm / (8.0 * std::sqrt(delta));
    b.single_upper = std::numbers::pi * n_qubits / (2.0 * std::sqrt(delta));
    b.assumptions =
        "multi-battery lower bound assumes per-gate infidelity at least (|H_gate|/(8<H_B>))^2 and "
        "worst-case trace-distance accumulation linear in the gate count; single-battery upper bound "
        "is the recycled sine-battery requirement for the composed unitary on n unit-gap qubits";
    return b;
}

// Evaluated bounds for one (gate, measure, epsilon) triple.
struct BoundReport {
    std::string gate_label;
    MeasureKind measure = MeasureKind::energy;
    double epsilon = 0.0;
    double lower_mean = 0.0;
    double lower_capacity = 0.0;
    double achievable_mean = 0.0;
    double achievable_capacity = 0.0;
    long m_star = 0;
    bool vacuous = false;
};

inline BoundReport make_energy_bound_report(const std::string& label, const Matrix& g,
                                            const SystemSpec& system, double eps) {
    BoundReport r;
    r.gate_label = label;
    r.measure = MeasureKind::energy;
    r.epsilon = eps;
    const GateResourceProfile p = gate_profile(g, system);
    const double k = static_cast<double>(system.norm());
    if (k > 0.0) {
        const CorollaryBound cb = corollary_bound(p.m_of_g, p.m_of_gdag, k, 0.0, eps);
        r.lower_mean = std::max(0.0, cb.closed_form);
        r.m_star = cb.m_star;
        r.vacuous = cb.closed_form <= 0.0;
    } else {
        r.vacuous = true;
    }
    r.lower_capacity = capacity_lower_bound(system, eps);
    const AchievableEnergy a = achievable_energy(g, system, eps);
    r.achievable_mean = a.mean;
    r.achievable_capacity = a.capacity;
    return r;
}

inline BoundReport make_coherence_bound_report(const std::string& label, const Matrix& g, double eps,
                                               int trials, std::uint64_t seed) {
    BoundReport r;
    r.gate_label = label;
    r.measure = MeasureKind::rel_entropy_coherence;
    r.epsilon = eps;
    const int d = static_cast<int>(g.rows());
    const double c_g = coherence_generation_estimate(g, trials, seed);
    const double c_gdag = coherence_generation_estimate(g.adjoint(), trials, seed + 1);
    const double bound = coherence_bound(c_g, c_gdag, d, eps);
    r.lower_mean = std::max(0.0, bound);
    r.lower_capacity = std::max(0.0, universal_coherence_bound(d, eps));
    r.vacuous = bound <= 0.0;
    const double sum = c_g + c_gdag;
    if (sum > 0.0) {
        const CorollaryBound cb = corollary_bound(c_g, c_gdag, std::log2(static_cast<double>(d)), 2.0, eps);
        r.m_star = cb.m_star;
    }
    return r;
}

}  // namespace ergon
