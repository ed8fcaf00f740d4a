#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergon/gates.hpp"
#include "ergon/spectra.hpp"

// Energy-preserving implementation of a gate G on system (x) battery: a
// unitary that is block-diagonal across total-energy sectors, acts as G on
// every sector in the interval E_ok = [|H_S|, |H_B|] and as the identity
// elsewhere. Blocks are stored implicitly; the joint operator is only
// materialized on the dense debug path.

namespace ergon {

struct EOkInterval {
    int lo = 0;
    int hi = 0;
    bool contains(int e) const { return e >= lo && e <= hi; }
};

// Sector basis at total energy E: all (x, b = E - E_x) with b a valid battery
// level, ordered by x.
inline std::vector<std::pair<int, int>> sector_basis(const SystemSpec& system, const BatterySim& battery,
                                                     int E) {
    if (E < 0 || E > system.norm() + battery.capacity)
        throw std::invalid_argument("sector_basis: total energy out of range");
    std::vector<std::pair<int, int>> basis;
    for (int x = 0; x < system.dim; ++x) {
        const int b = E - system.energies[static_cast<std::size_t>(x)];
        if (b >= 0 && b <= battery.capacity) basis.emplace_back(x, b);
    }
    return basis;
}

inline EOkInterval e_ok(const SystemSpec& system, const BatterySim& battery) {
    if (battery.system_norm != system.norm())
        throw std::invalid_argument("e_ok: battery was built for a different system");
    return {system.norm(), battery.capacity};
}

struct JointState {
    int system_dim = 0;
    int battery_levels = 0;
    Vector amps;  // row-major (x, b): index = x * battery_levels + b

    std::size_t index(int x, int b) const {
        return static_cast<std::size_t>(x) * static_cast<std::size_t>(battery_levels) +
               static_cast<std::size_t>(b);
    }
    double norm() const { return amps.norm(); }
};

inline JointState product_state(const Vector& system_amps, const BatterySim& battery) {
    JointState s;
    s.system_dim = static_cast<int>(system_amps.size());
    s.battery_levels = battery.levels();
    s.amps = Vector::Zero(static_cast<Eigen::Index>(s.system_dim) * s.battery_levels);
    for (int x = 0; x < s.system_dim; ++x)
        for (int b = 0; b < s.battery_levels; ++b)
            s.amps(s.index(x, b)) = system_amps(x) * battery.amplitudes[static_cast<std::size_t>(b)];
    return s;
}

struct SectorDilation {
    SystemSpec system;
    int battery_capacity = 0;
    int battery_R = 0;
    std::string gate_label;
    Matrix gate;
    EOkInterval ok;

    int joint_dim() const { return system.dim * (battery_capacity + 1); }
    int max_total_energy() const { return system.norm() + battery_capacity; }

    // Matrix of the block at total energy E in the sector_basis ordering:
    // G's matrix elements inside E_ok, the identity projector outside.
    Matrix sector_block(int E, const std::vector<std::pair<int, int>>& basis) const {
        const auto n = static_cast<Eigen::Index>(basis.size());
        if (!ok.contains(E)) return Matrix::Identity(n, n);
        Matrix block(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                block(i, j) = gate(basis[static_cast<std::size_t>(i)].first,
                                   basis[static_cast<std::size_t>(j)].first);
        return block;
    }

    // Dense joint unitary, for inspection only.
    Matrix dense_matrix(const BatterySim& battery) const {
        if (joint_dim() > 4096)
            throw std::invalid_argument("SectorDilation::dense_matrix: joint dimension exceeds debug limit");
        const int levels = battery_capacity + 1;
        Matrix u = Matrix::Zero(joint_dim(), joint_dim());
        for (int E = 0; E <= max_total_energy(); ++E) {
            const auto basis = sector_basis(system, battery, E);
            const Matrix block = sector_block(E, basis);
            for (std::size_t i = 0; i < basis.size(); ++i)
                for (std::size_t j = 0; j < basis.size(); ++j) {
                    const auto row = static_cast<Eigen::Index>(basis[i].first) * levels + basis[i].second;
                    const auto col = static_cast<Eigen::Index>(basis[j].first) * levels + basis[j].second;
                    u(row, col) = block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                }
        }
        return u;
    }
};

inline SectorDilation build_dilation(const Matrix& g, const SystemSpec& system, const BatterySim& battery,
                                     std::string label = "") {
    if (g.rows() != system.dim || g.cols() != system.dim)
        throw std::invalid_argument("build_dilation: gate dimension does not match system");
    if (!is_unitary(g)) throw std::invalid_argument("build_dilation: gate is not unitary");
    if (!system.uniform)
        throw std::invalid_argument("build_dilation: construction requires an equally spaced spectrum");
    SectorDilation d;
    d.system = system;
    d.battery_capacity = battery.capacity;
    d.battery_R = battery.R;
    d.gate_label = std::move(label);
    d.gate = g;
    d.ok = e_ok(system, battery);
    return d;
}

inline SectorDilation build_dilation(const GateSpec& g, const SystemSpec& system, const BatterySim& battery) {
    return build_dilation(g.matrix, system, battery, g.label);
}

// Sector-wise application. Sectors are disjoint index sets, so this never
// mixes different total energies.
inline JointState apply_dilation(const SectorDilation& d, const JointState& state) {
    if (state.system_dim != d.system.dim || state.battery_levels != d.battery_capacity + 1)
        throw std::invalid_argument("apply_dilation: state dimensions do not match dilation");
    JointState out = state;
    std::vector<std::pair<int, int>> basis;
    Vector in_block, out_block;
    for (int E = d.ok.lo; E <= d.ok.hi; ++E) {
        basis.clear();
        for (int x = 0; x < d.system.dim; ++x) {
            const int b = E - d.system.energies[static_cast<std::size_t>(x)];
            if (b >= 0 && b <= d.battery_capacity) basis.emplace_back(x, b);
        }
        const auto n = static_cast<Eigen::Index>(basis.size());
        in_block.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            in_block(i) = state.amps(state.index(basis[static_cast<std::size_t>(i)].first,
                                                  basis[static_cast<std::size_t>(i)].second));
        out_block.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Complex acc(0, 0);
            for (Eigen::Index j = 0; j < n; ++j)
                acc += d.gate(basis[static_cast<std::size_t>(i)].first,
                              basis[static_cast<std::size_t>(j)].first) *
                       in_block(j);
            out_block(i) = acc;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            out.amps(out.index(basis[static_cast<std::size_t>(i)].first,
                               basis[static_cast<std::size_t>(i)].second)) = out_block(i);
    }
    return out;
}

// Induced channel on the system, E_G(rho) = Tr_B[U (rho x beta) U+], held as
// the Kraus family K_b = (I x <b|) U (I x |beta>).
struct KrausChannel {
    int dim = 0;
    std::string gate_label;
    int R = 0;
    std::vector<int> levels;    // battery level b per operator
    std::vector<Matrix> ops;    // K_b

    Matrix completeness() const {
        Matrix c = Matrix::Zero(dim, dim);
        for (const auto& k : ops) c += k.adjoint() * k;
        return c;
    }

    Matrix apply(const Matrix& rho) const {
        Matrix out = Matrix::Zero(dim, dim);
        for (const auto& k : ops) out += k * rho * k.adjoint();
        return out;
    }
};

namespace detail {

// Columns of every K_b at once: column x is U (|x> x |beta>).
inline std::vector<Matrix> kraus_full(const SectorDilation& d, const BatterySim& battery) {
    const int dim = d.system.dim;
    const int levels = battery.levels();
    std::vector<Matrix> ops(static_cast<std::size_t>(levels), Matrix::Zero(dim, dim));
    for (int x = 0; x < dim; ++x) {
        Vector basis_in = Vector::Zero(dim);
        basis_in(x) = 1.0;
        const JointState out = apply_dilation(d, product_state(basis_in, battery));
        for (int y = 0; y < dim; ++y)
            for (int b = 0; b < levels; ++b) ops[static_cast<std::size_t>(b)](y, x) = out.amps(out.index(y, b));
    }
    return ops;
}

}  // namespace detail

inline KrausChannel induced_channel(const SectorDilation& d, const BatterySim& battery) {
    if (battery.capacity != d.battery_capacity)
        throw std::invalid_argument("induced_channel: battery does not match dilation");
    const auto full = detail::kraus_full(d, battery);
    KrausChannel ch;
    ch.dim = d.system.dim;
    ch.gate_label = d.gate_label;
    ch.R = battery.R;
    double dropped = 0.0;
    for (int b = 0; b < battery.levels(); ++b) {
        const Matrix& k = full[static_cast<std::size_t>(b)];
        if (max_abs(k) > 1e-14) {
            ch.levels.push_back(b);
            ch.ops.push_back(k);
        } else {
            dropped += (k.adjoint() * k).trace().real();
        }
    }
    if (dropped > 1e-12)
        throw std::runtime_error("induced_channel: dropped Kraus mass exceeds tolerance");
    return ch;
}

// Battery state after the interaction, Tr_S[U (rho x beta) U+]. With the
// maximally mixed probe this is the state that powers the inverse gate
// through the adjoint dilation.
inline Matrix residual_battery(const SectorDilation& d, const BatterySim& battery, const Matrix& rho) {
    validate_density(rho);
    if (rho.rows() != d.system.dim)
        throw std::invalid_argument("residual_battery: probe dimension mismatch");
    const auto full = detail::kraus_full(d, battery);
    const int levels = battery.levels();
    Matrix out(levels, levels);
    std::vector<Matrix> k_rho(full.size());
    for (std::size_t b = 0; b < full.size(); ++b) k_rho[b] = full[b] * rho;
    for (int b = 0; b < levels; ++b)
        for (int bp = 0; bp < levels; ++bp)
            out(b, bp) = (k_rho[static_cast<std::size_t>(b)] *
                          full[static_cast<std::size_t>(bp)].adjoint())
                             .trace();
    return out;
}

inline Matrix residual_battery(const SectorDilation& d, const BatterySim& battery) {
    const Matrix mixed = Matrix::Identity(d.system.dim, d.system.dim) / d.system.dim;
    return residual_battery(d, battery, mixed);
}

// Deviation of U_{G1} U_{G2} from U_{G1 G2} on the E_ok sectors, as the max
// entry deviation over sector blocks.
inline double composition_check(const Matrix& g1, const Matrix& g2, const SystemSpec& system,
                                const BatterySim& battery) {
    const SectorDilation d1 = build_dilation(g1, system, battery);
    const SectorDilation d2 = build_dilation(g2, system, battery);
    const SectorDilation d12 = build_dilation(Matrix(g1 * g2), system, battery);
    double worst = 0.0;
    const EOkInterval ok = e_ok(system, battery);
    for (int E = ok.lo; E <= ok.hi; ++E) {
        const auto basis = sector_basis(system, battery, E);
        const Matrix prod = d1.sector_block(E, basis) * d2.sector_block(E, basis);
        worst = std::max(worst, max_abs(prod - d12.sector_block(E, basis)));
    }
    return worst;
}

}  // namespace ergon
