#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

// Energy ladders and battery states. All energies are integers in units of
// the level spacing (hbar*omega = 1), with the ground level pinned at zero.

namespace ergon {

// Target system: basis states |x> with integer energies E_x, min energy 0.
//
// For an n-qubit register the basis is the computational one and E_x is the
// Hamming weight of x; the list is then not sorted, but the last entry
// (x = 11...1) still carries the maximum.
struct SystemSpec {
    int dim = 0;
    std::vector<int> energies;  // E_x per basis index x
    bool uniform = false;       // every integer level 0..norm() is attained
    int n_qubits = 0;           // > 0 when built as a qubit register

    // Operator norm of the Hamiltonian, equal to the maximum energy.
    int norm() const { return energies.empty() ? 0 : *std::max_element(energies.begin(), energies.end()); }

    static SystemSpec qubits(int n_qubits);
    static SystemSpec ladder(int dim);
    static SystemSpec from_energies(std::vector<int> energies);
};

namespace detail {

inline bool ladder_complete(const std::vector<int>& energies, int top) {
    std::vector<char> seen(static_cast<std::size_t>(top) + 1, 0);
    for (int e : energies) seen[static_cast<std::size_t>(e)] = 1;
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

}  // namespace detail

inline SystemSpec SystemSpec::from_energies(std::vector<int> energies) {
    if (energies.empty()) throw std::invalid_argument("SystemSpec: empty energy list");
    if (energies.front() != 0) throw std::invalid_argument("SystemSpec: energies[0] must be 0");
    for (int e : energies)
        if (e < 0) throw std::invalid_argument("SystemSpec: negative energy level");
    SystemSpec s;
    s.dim = static_cast<int>(energies.size());
    s.energies = std::move(energies);
    s.uniform = detail::ladder_complete(s.energies, s.norm());
    return s;
}

// Register of n unit-gap qubits: d = 2^n, E_x = popcount(x), |H_S| = n.
inline SystemSpec SystemSpec::qubits(int n_qubits) {
    if (n_qubits < 1) throw std::invalid_argument("SystemSpec::qubits: need n >= 1");
    if (n_qubits > 24) throw std::invalid_argument("SystemSpec::qubits: register too large");
    const int d = 1 << n_qubits;
    std::vector<int> e(static_cast<std::size_t>(d));
    for (int x = 0; x < d; ++x) e[static_cast<std::size_t>(x)] = std::popcount(static_cast<unsigned>(x));
    SystemSpec s = from_energies(std::move(e));
    s.n_qubits = n_qubits;
    return s;
}

// Single qudit with the full ladder 0,1,...,d-1.
inline SystemSpec SystemSpec::ladder(int dim) {
    if (dim < 1) throw std::invalid_argument("SystemSpec::ladder: need dim >= 1");
    std::vector<int> e(static_cast<std::size_t>(dim));
    std::iota(e.begin(), e.end(), 0);
    return from_energies(std::move(e));
}

inline SystemSpec make_uniform_system(int n_qubits) { return SystemSpec::qubits(n_qubits); }

// Battery with levels 0..R*|H_S| and the sine-shaped superposition
//   beta(E_B) = sqrt(2/L) sin((E_B - |H_S| + 1) pi / L),  E_B in [|H_S|, (R-1)|H_S|],
// zero elsewhere, with L = (R-2)|H_S| + 2. The edge levels are unoccupied so
// the battery can both supply and absorb energy.
struct BatterySim {
    int R = 0;
    int system_norm = 0;           // |H_S| the battery was built for
    int capacity = 0;              // |H_B| = R * |H_S|
    int L = 0;                     // (R-2)|H_S| + 2
    std::vector<double> amplitudes;  // size capacity + 1, real

    int levels() const { return capacity + 1; }

    double mean_energy() const {
        double m = 0.0;
        for (std::size_t b = 0; b < amplitudes.size(); ++b)
            m += static_cast<double>(b) * amplitudes[b] * amplitudes[b];
        return m;
    }
};

inline BatterySim sine_battery(const SystemSpec& system, int R) {
    if (R < 3) throw std::invalid_argument("sine_battery: R must be >= 3");
    if (!system.uniform)
        throw std::invalid_argument("sine_battery: construction requires an equally spaced spectrum");
    const int s = system.norm();
    if (s < 1) throw std::invalid_argument("sine_battery: degenerate system has no energy scale");

    BatterySim b;
    b.R = R;
    b.system_norm = s;
    b.capacity = R * s;
    b.L = (R - 2) * s + 2;
    b.amplitudes.assign(static_cast<std::size_t>(b.capacity) + 1, 0.0);
    const double pref = std::sqrt(2.0 / b.L);
    for (int e = s; e <= (R - 1) * s; ++e)
        b.amplitudes[static_cast<std::size_t>(e)] = pref * std::sin((e - s + 1) * std::numbers::pi / b.L);
    return b;
}

enum class Space { system, battery, joint };

// Diagonal energy observable over a named space. The joint observable adds
// system and battery energies under row-major (x, b) indexing.
struct EnergyObservable {
    Space space = Space::system;
    std::vector<int> diagonal;
};

inline EnergyObservable system_observable(const SystemSpec& s) {
    return {Space::system, s.energies};
}

inline EnergyObservable battery_observable(const BatterySim& b) {
    std::vector<int> d(static_cast<std::size_t>(b.levels()));
    std::iota(d.begin(), d.end(), 0);
    return {Space::battery, std::move(d)};
}

inline EnergyObservable joint_observable(const SystemSpec& s, const BatterySim& b) {
    std::vector<int> d;
    d.reserve(static_cast<std::size_t>(s.dim) * static_cast<std::size_t>(b.levels()));
    for (int x = 0; x < s.dim; ++x)
        for (int lvl = 0; lvl < b.levels(); ++lvl)
            d.push_back(s.energies[static_cast<std::size_t>(x)] + lvl);
    return {Space::joint, std::move(d)};
}

template <typename Scalar>
double mean_energy(const std::vector<Scalar>& state, const EnergyObservable& obs) {
    if (state.size() != obs.diagonal.size())
        throw std::invalid_argument("mean_energy: state/observable dimension mismatch");
    double norm2 = 0.0, m = 0.0;
    for (std::size_t k = 0; k < state.size(); ++k) {
        const double p = std::norm(std::complex<double>(state[k]));
        norm2 += p;
        m += p * obs.diagonal[k];
    }
    if (std::abs(norm2 - 1.0) > 1e-10)
        throw std::invalid_argument("mean_energy: state is not normalized");
    return m;
}

}  // namespace ergon
