#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergon/dilation.hpp"
#include "ergon/fidelity.hpp"
#include "ergon/gates.hpp"
#include "ergon/spectra.hpp"

// Circuits on n unit-gap qubits powered by one shared battery. Every gate
// interacts with the full battery through its own energy-preserving dilation;
// the battery is recycled from step to step. Includes the alternating G/G+
// reuse experiment and the exact classical-input mode.

namespace ergon {

struct CircuitGate {
    std::string label;
    Matrix matrix;
    std::vector<int> targets;  // qubit indices, targets[0] is the high bit of the gate index
};

struct CircuitSpec {
    int n_qubits = 0;
    std::vector<CircuitGate> gates;
    std::string label;
};

inline void validate_circuit(const CircuitSpec& c) {
    if (c.n_qubits < 1 || c.n_qubits > 20) throw std::invalid_argument("circuit: bad qubit count");
    for (const auto& g : c.gates) {
        const int k = static_cast<int>(g.targets.size());
        if (k < 1 || k > c.n_qubits) throw std::invalid_argument("circuit: bad target count");
        if (g.matrix.rows() != (1 << k)) throw std::invalid_argument("circuit: gate size does not match targets");
        if (!is_unitary(g.matrix)) throw std::invalid_argument("circuit: gate is not unitary");
        std::vector<int> seen;
        for (int t : g.targets) {
            if (t < 0 || t >= c.n_qubits) throw std::invalid_argument("circuit: target out of range");
            if (std::find(seen.begin(), seen.end(), t) != seen.end())
                throw std::invalid_argument("circuit: duplicate target");
            seen.push_back(t);
        }
    }
}

// Dense unitary of the whole circuit on the bare register.
inline Matrix composed_unitary(const CircuitSpec& c) {
    validate_circuit(c);
    const int dim = 1 << c.n_qubits;
    Matrix u = Matrix::Identity(dim, dim);
    for (const auto& g : c.gates) {
        const int k = static_cast<int>(g.targets.size());
        Matrix step = Matrix::Zero(dim, dim);
        for (int x = 0; x < dim; ++x) {
            int loc = 0;
            for (int p = 0; p < k; ++p)
                loc = (loc << 1) | ((x >> g.targets[static_cast<std::size_t>(p)]) & 1);
            for (int lp = 0; lp < (1 << k); ++lp) {
                int y = x;
                for (int p = 0; p < k; ++p) {
                    const int bit = (lp >> (k - 1 - p)) & 1;
                    const int pos = g.targets[static_cast<std::size_t>(p)];
                    y = (y & ~(1 << pos)) | (bit << pos);
                }
                step(y, x) = g.matrix(lp, loc);
            }
        }
        u = step * u;
    }
    return u;
}

namespace detail {

// Joint register (x) battery state with per-gate sector application. The gate
// on k targets acts on the local total energy e = E_targets + b; sectors with
// e in [k, capacity] carry a full copy of the gate, all others are untouched.
struct RegisterBatteryState {
    int n_qubits = 0;
    int levels = 0;  // battery capacity + 1
    Vector amps;     // index = x * levels + b

    std::size_t index(int x, int b) const {
        return static_cast<std::size_t>(x) * static_cast<std::size_t>(levels) + static_cast<std::size_t>(b);
    }

    double battery_mean() const {
        double m = 0.0;
        const int dim = 1 << n_qubits;
        for (int x = 0; x < dim; ++x)
            for (int b = 0; b < levels; ++b) m += std::norm(amps(index(x, b))) * b;
        return m;
    }

    double register_mean() const {
        double m = 0.0;
        const int dim = 1 << n_qubits;
        for (int x = 0; x < dim; ++x) {
            const int e = std::popcount(static_cast<unsigned>(x));
            for (int b = 0; b < levels; ++b) m += std::norm(amps(index(x, b))) * e;
        }
        return m;
    }

    Matrix register_density() const {
        const int dim = 1 << n_qubits;
        Matrix rho = Matrix::Zero(dim, dim);
        for (int b = 0; b < levels; ++b)
            for (int x = 0; x < dim; ++x)
                for (int y = 0; y < dim; ++y)
                    rho(x, y) += amps(index(x, b)) * std::conj(amps(index(y, b)));
        return rho;
    }

    void apply_local_gate(const CircuitGate& g) {
        const int k = static_cast<int>(g.targets.size());
        const int n_loc = 1 << k;
        const int capacity = levels - 1;
        int spect_mask = (1 << n_qubits) - 1;
        for (int t : g.targets) spect_mask &= ~(1 << t);

        // enumerate spectator configurations by distributing bits over the
        // non-target positions
        std::vector<int> spect_positions;
        for (int q = 0; q < n_qubits; ++q)
            if ((spect_mask >> q) & 1) spect_positions.push_back(q);
        const int n_spect = 1 << spect_positions.size();

        std::vector<int> loc_energy(static_cast<std::size_t>(n_loc));
        for (int lp = 0; lp < n_loc; ++lp)
            loc_energy[static_cast<std::size_t>(lp)] = std::popcount(static_cast<unsigned>(lp));

        std::vector<std::size_t> idx(static_cast<std::size_t>(n_loc));
        Vector in_block(n_loc), out_block(n_loc);
        for (int sp = 0; sp < n_spect; ++sp) {
            int base = 0;
            for (std::size_t i = 0; i < spect_positions.size(); ++i)
                if ((sp >> i) & 1) base |= 1 << spect_positions[i];
            // local sector: e = popcount(targets) + battery level; sectors
            // outside E_ok^(k) = [k, capacity] act as the identity
            for (int e = k; e <= capacity; ++e) {
                for (int lp = 0; lp < n_loc; ++lp) {
                    int x = base;
                    for (int p = 0; p < k; ++p) {
                        const int bit = (lp >> (k - 1 - p)) & 1;
                        x |= bit << g.targets[static_cast<std::size_t>(p)];
                    }
                    idx[static_cast<std::size_t>(lp)] = index(x, e - loc_energy[static_cast<std::size_t>(lp)]);
                }
                for (int lp = 0; lp < n_loc; ++lp) in_block(lp) = amps(idx[static_cast<std::size_t>(lp)]);
                out_block.noalias() = g.matrix * in_block;
                for (int lp = 0; lp < n_loc; ++lp) amps(idx[static_cast<std::size_t>(lp)]) = out_block(lp);
            }
        }
    }
};

}  // namespace detail

struct StepTrace {
    double battery_mean = 0.0;
    double register_mean = 0.0;
    double total_mean = 0.0;
};

struct RunReport {
    std::string mode;
    std::string circuit_label;
    int n_qubits = 0;
    int R = 0;
    double fidelity = 1.0;
    std::vector<StepTrace> trace;            // entry 0 is the initial state
    Matrix register_density;                 // quantum mode
    std::vector<double> outcome_distribution;  // classical mode
    std::vector<double> deviations;          // alternating mode, per copy
    double cumulative_deviation = 0.0;
    double epsilon_single = 0.0;             // measured single-gate infidelity (alternating)
    double bound_4m_sqrt_eps = 0.0;
    bool within_bound = true;
};

// Run the circuit on register (x) sine battery and compare against the ideal
// composed unitary. The battery is sized for the whole register (capacity
// R*n), so by the composition property the final fidelity depends only on the
// composed gate, not on the decomposition.
inline RunReport simulate_circuit(const CircuitSpec& c, int R, const Vector& input) {
    validate_circuit(c);
    if (R < 3) throw std::invalid_argument("simulate_circuit: R must be >= 3");
    const int dim = 1 << c.n_qubits;
    if (input.size() != dim) throw std::invalid_argument("simulate_circuit: input dimension mismatch");
    if (std::abs(input.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("simulate_circuit: input is not normalized");

    const SystemSpec reg = SystemSpec::qubits(c.n_qubits);
    const BatterySim battery = sine_battery(reg, R);
    if (static_cast<double>(dim) * battery.levels() > static_cast<double>(1 << 26))
        throw std::invalid_argument("simulate_circuit: joint dimension too large");

    detail::RegisterBatteryState st;
    st.n_qubits = c.n_qubits;
    st.levels = battery.levels();
    st.amps = Vector::Zero(static_cast<Eigen::Index>(dim) * st.levels);
    for (int x = 0; x < dim; ++x)
        for (int b = 0; b < st.levels; ++b)
            st.amps(st.index(x, b)) = input(x) * battery.amplitudes[static_cast<std::size_t>(b)];

    RunReport rep;
    rep.mode = "quantum";
    rep.circuit_label = c.label;
    rep.n_qubits = c.n_qubits;
    rep.R = R;
    const auto record = [&]() {
        StepTrace t;
        t.battery_mean = st.battery_mean();
        t.register_mean = st.register_mean();
        t.total_mean = t.battery_mean + t.register_mean;
        rep.trace.push_back(t);
    };
    record();
    for (const auto& g : c.gates) {
        st.apply_local_gate(g);
        record();
    }

    const Vector ideal = composed_unitary(c) * input;
    double f = 0.0;
    for (int b = 0; b < st.levels; ++b) {
        Complex overlap(0, 0);
        for (int x = 0; x < dim; ++x) overlap += std::conj(ideal(x)) * st.amps(st.index(x, b));
        f += std::norm(overlap);
    }
    rep.fidelity = f;
    rep.register_density = st.register_density();
    return rep;
}

// Alternating reuse of one battery: U_G on copy 1, its adjoint on copy 2, and
// so on through 2m fresh copies. Reports each copy's trace distance from its
// ideal image and checks the cumulative deviation against 4 m sqrt(eps) with
// eps the measured single-gate worst-case infidelity at this R.
inline RunReport alternating_experiment(const Matrix& g, const SystemSpec& system, int m, int R,
                                        const std::vector<Vector>& inputs,
                                        const WorstCaseOptions& wc_opt = {}) {
    if (m < 1) throw std::invalid_argument("alternating_experiment: need m >= 1");
    if (!is_unitary(g) || g.rows() != system.dim)
        throw std::invalid_argument("alternating_experiment: bad gate");
    if (static_cast<int>(inputs.size()) != 2 * m)
        throw std::invalid_argument("alternating_experiment: need exactly 2m product inputs");
    const BatterySim battery = sine_battery(system, R);
    const int d = system.dim;
    const int copies = 2 * m;
    double joint_size = static_cast<double>(battery.levels());
    for (int i = 0; i < copies; ++i) joint_size *= d;
    if (joint_size > static_cast<double>(1 << 24))
        throw std::invalid_argument("alternating_experiment: joint dimension exceeds guard");

    const auto total = static_cast<Eigen::Index>(joint_size);
    const int levels = battery.levels();
    // index = ((x_1 d + x_2) d + ... ) * levels + b, copy 1 is the slowest
    Vector amps = Vector::Zero(total);
    {
        std::vector<Eigen::Index> strides(static_cast<std::size_t>(copies));
        Eigen::Index stride = levels;
        for (int i = copies - 1; i >= 0; --i) {
            strides[static_cast<std::size_t>(i)] = stride;
            stride *= d;
        }
        const Eigen::Index reg_total = total / levels;
        for (Eigen::Index xall = 0; xall < reg_total; ++xall) {
            Complex prod(1, 0);
            Eigen::Index rest = xall;
            for (int i = copies - 1; i >= 0; --i) {
                const int xi = static_cast<int>(rest % d);
                rest /= d;
                prod *= inputs[static_cast<std::size_t>(i)](xi);
            }
            for (int b = 0; b < levels; ++b)
                amps(xall * levels + b) = prod * battery.amplitudes[static_cast<std::size_t>(b)];
        }
    }

    const EOkInterval ok = e_ok(system, battery);
    const auto apply_on_copy = [&](const Matrix& gate, int copy) {
        // stride of copy index in the flattened layout
        Eigen::Index stride = levels;
        for (int i = copies - 1; i > copy; --i) stride *= d;
        const Eigen::Index outer = total / (stride * d);
        Vector in_block(d), out_block(d);
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
        for (Eigen::Index hi = 0; hi < outer; ++hi) {
            const Eigen::Index base_hi = hi * stride * d;
            // iterate over (spectator-low, battery) pairs grouped by sector
            const Eigen::Index low_count = stride / levels;
            for (Eigen::Index lo = 0; lo < low_count; ++lo) {
                const Eigen::Index base = base_hi + lo * levels;
                for (int e = ok.lo; e <= ok.hi; ++e) {
                    // every x pairs with a valid battery level inside E_ok
                    for (int x = 0; x < d; ++x) {
                        const int b = e - system.energies[static_cast<std::size_t>(x)];
                        idx[static_cast<std::size_t>(x)] = base + static_cast<Eigen::Index>(x) * stride + b;
                    }
                    for (int x = 0; x < d; ++x) in_block(x) = amps(idx[static_cast<std::size_t>(x)]);
                    out_block.noalias() = gate * in_block;
                    for (int x = 0; x < d; ++x) amps(idx[static_cast<std::size_t>(x)]) = out_block(x);
                }
            }
        }
    };

    RunReport rep;
    rep.mode = "alternating";
    rep.n_qubits = system.n_qubits;
    rep.R = R;
    for (int copy = 0; copy < copies; ++copy) {
        const bool forward = (copy % 2 == 0);
        apply_on_copy(forward ? g : Matrix(g.adjoint()), copy);
    }

    // per-copy reduced states vs ideal images
    for (int copy = 0; copy < copies; ++copy) {
        Eigen::Index stride = levels;
        for (int i = copies - 1; i > copy; --i) stride *= d;
        Matrix rho = Matrix::Zero(d, d);
        const Eigen::Index outer = total / (stride * d);
        for (Eigen::Index hi = 0; hi < outer; ++hi)
            for (Eigen::Index lo = 0; lo < stride; ++lo) {
                const Eigen::Index base = hi * stride * d + lo;
                for (int x = 0; x < d; ++x)
                    for (int y = 0; y < d; ++y)
                        rho(x, y) += amps(base + x * stride) * std::conj(amps(base + y * stride));
            }
        const bool forward = (copy % 2 == 0);
        const Vector ideal =
            (forward ? g : Matrix(g.adjoint())) * inputs[static_cast<std::size_t>(copy)];
        const Matrix diff = rho - ideal * ideal.adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
        const double td = 0.5 * es.eigenvalues().cwiseAbs().sum();
        rep.deviations.push_back(td);
        rep.cumulative_deviation += td;
    }

    const SectorDilation dil = build_dilation(g, system, battery);
    const FidelityResult fr = worst_case_fidelity(induced_channel(dil, battery), g, wc_opt);
    rep.epsilon_single = fr.epsilon;
    rep.bound_4m_sqrt_eps = 4.0 * m * std::sqrt(std::max(0.0, fr.epsilon));
    rep.within_bound = rep.cumulative_deviation <= rep.bound_4m_sqrt_eps + 1e-12;
    return rep;
}

// Classical mode: basis input x with the battery in the single level E - E_x
// for a total energy E inside E_ok^(n). The output statistics reproduce
// |<y| G_N ... G_1 |x>|^2 exactly, for every R >= 3.
inline RunReport classical_run(const CircuitSpec& c, int input_index, int R, int total_energy = -1) {
    validate_circuit(c);
    if (R < 3) throw std::invalid_argument("classical_run: R must be >= 3");
    const int dim = 1 << c.n_qubits;
    if (input_index < 0 || input_index >= dim)
        throw std::invalid_argument("classical_run: input index out of range");
    const SystemSpec reg = SystemSpec::qubits(c.n_qubits);
    const BatterySim battery = sine_battery(reg, R);  // fixes capacity = R*n
    const int e_total = total_energy < 0 ? c.n_qubits : total_energy;
    if (e_total < reg.norm() || e_total > battery.capacity)
        throw std::invalid_argument("classical_run: total energy outside E_ok");
    const int b0 = e_total - std::popcount(static_cast<unsigned>(input_index));

    detail::RegisterBatteryState st;
    st.n_qubits = c.n_qubits;
    st.levels = battery.levels();
    st.amps = Vector::Zero(static_cast<Eigen::Index>(dim) * st.levels);
    st.amps(st.index(input_index, b0)) = 1.0;

    RunReport rep;
    rep.mode = "classical";
    rep.circuit_label = c.label;
    rep.n_qubits = c.n_qubits;
    rep.R = R;
    const auto record = [&]() {
        StepTrace t;
        t.battery_mean = st.battery_mean();
        t.register_mean = st.register_mean();
        t.total_mean = t.battery_mean + t.register_mean;
        rep.trace.push_back(t);
    };
    record();
    for (const auto& g : c.gates) {
        st.apply_local_gate(g);
        record();
    }
    rep.outcome_distribution.resize(static_cast<std::size_t>(dim), 0.0);
    for (int x = 0; x < dim; ++x) {
        double p = 0.0;
        for (int b = 0; b < st.levels; ++b) p += std::norm(st.amps(st.index(x, b)));
        rep.outcome_distribution[static_cast<std::size_t>(x)] = p;
    }
    rep.fidelity = 1.0;
    return rep;
}

}  // namespace ergon
