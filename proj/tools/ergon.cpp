#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ergon/bounds.hpp"
#include "ergon/circuits.hpp"
#include "ergon/dilation.hpp"
#include "ergon/fidelity.hpp"
#include "ergon/json_io.hpp"
#include "ergon/spectra.hpp"

// ergon: energy-preserving gate implementations on a quantum battery.
// Subcommands: simulate | scan | circuit | bounds | verify.

namespace {

using namespace ergon;

constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;

int thread_cap() {
    if (const char* env = std::getenv("ERGON_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename F>
void parallel_for(int n, F&& body) {
    const int workers = std::min(thread_cap(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
    out << text << "\n";
}

// System on which a gate of dimension d acts: a qubit register when d is a
// power of two, otherwise the full d-level ladder.
SystemSpec system_for_dim(int d) {
    if (d >= 2 && (d & (d - 1)) == 0) {
        int n = 0;
        while ((1 << n) < d) ++n;
        return SystemSpec::qubits(n);
    }
    return SystemSpec::ladder(d);
}

GateSpec resolve_gate(const std::string& name, const std::string& file) {
    if (!name.empty() && !file.empty())
        throw std::invalid_argument("give either --gate or --gate-file, not both");
    if (!name.empty()) return named_gate(name);
    if (!file.empty()) return load_gate_file(file);
    throw std::invalid_argument("a gate is required (--gate or --gate-file)");
}

std::vector<int> parse_scan_grid(const std::string& scan, const std::vector<int>& r_list) {
    std::vector<int> grid = r_list;
    if (!scan.empty()) {
        int lo = 0, hi = 0, step = 0;
        if (std::sscanf(scan.c_str(), "%d:%d:%d", &lo, &hi, &step) != 3 || step <= 0 || lo > hi)
            throw std::invalid_argument("bad --scan range, expected R1:R2:step");
        for (int r = lo; r <= hi; r += step) grid.push_back(r);
    }
    if (grid.empty()) throw std::invalid_argument("empty scan grid (use --scan or --R)");
    for (int r : grid)
        if (r < 3) throw std::invalid_argument("scan grid contains R < 3");
    return grid;
}

struct SolveOutcome {
    FidelityResult fr;
    BatterySim battery;
};

SolveOutcome solve_gate(const GateSpec& gate, const SystemSpec& system, int r, const WorstCaseOptions& opt) {
    const BatterySim battery = sine_battery(system, r);
    const SectorDilation dil = build_dilation(gate, system, battery);
    const KrausChannel ch = induced_channel(dil, battery);
    return {worst_case_fidelity(ch, gate.matrix, opt), battery};
}

int cmd_simulate(const GateSpec& gate, int r, const WorstCaseOptions& opt, const std::string& out_path) {
    const SystemSpec system = system_for_dim(gate.dim());
    const SolveOutcome s = solve_gate(gate, system, r, opt);
    const BoundReport bounds =
        make_energy_bound_report(gate.label, gate.matrix, system, std::max(s.fr.epsilon, 0.0));
    std::string text = "{\"gate\":\"" + gate.label + "\",\"R\":" + std::to_string(r) +
                       ",\"system\":" + system_json(system) + ",\"battery\":" + battery_json(s.battery) +
                       ",\"fidelity\":" + fidelity_result_json(s.fr) +
                       ",\"bounds\":" + bound_report_json(bounds) + "}";
    write_output(text, out_path);
    return s.fr.converged ? 0 : kExitNoConvergence;
}

int cmd_scan(const GateSpec& gate, const std::vector<int>& grid, const WorstCaseOptions& base_opt,
             const std::string& out_path, const std::string& format) {
    const SystemSpec system = system_for_dim(gate.dim());
    const int n = static_cast<int>(grid.size());
    std::vector<ScanRow> rows(static_cast<std::size_t>(n));
    parallel_for(n, [&](int i) {
        ScanRow& row = rows[static_cast<std::size_t>(i)];
        row.gate = gate.label;
        row.R = grid[static_cast<std::size_t>(i)];
        try {
            WorstCaseOptions opt = base_opt;
            opt.seed = base_opt.seed + static_cast<std::uint64_t>(i);
            const SolveOutcome s = solve_gate(gate, system, row.R, opt);
            row.mean_energy = s.battery.mean_energy();
            row.f_wc = s.fr.f_wc;
            row.epsilon = s.fr.epsilon;
            row.analytic_epsilon = analytic_infidelity(gate.matrix, system, row.mean_energy);
            row.lower_bound_mean_energy =
                energy_lower_bound(gate.matrix, system, std::max(s.fr.epsilon, 1e-300));
            row.ratio = row.lower_bound_mean_energy > 0.0 ? row.mean_energy / row.lower_bound_mean_energy
                                                          : 0.0;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    std::ostringstream o;
    bool failed = false;
    if (format == "json") {
        o << "[";
        for (int i = 0; i < n; ++i) o << (i ? "," : "") << scan_row_json(rows[static_cast<std::size_t>(i)]);
        o << "]";
    } else {
        o << scan_csv_header();
        for (const auto& row : rows) o << "\n" << scan_csv_row(row);
    }
    for (const auto& row : rows) failed = failed || !row.error.empty();
    write_output(o.str(), out_path);
    return failed ? 1 : 0;
}

int cmd_circuit(const std::string& file, const std::string& gate_name, const std::string& gate_file, int r,
                const std::string& mode, int m, int input_index, int total_energy, std::uint64_t seed,
                const WorstCaseOptions& wc_opt, const std::string& out_path) {
    RunReport rep;
    if (mode == "quantum") {
        const CircuitSpec c = load_circuit_file(file);
        Vector input = Vector::Zero(1 << c.n_qubits);
        if (input_index < 0 || input_index >= (1 << c.n_qubits))
            throw std::invalid_argument("input index out of range");
        input(input_index) = 1.0;
        rep = simulate_circuit(c, r, input);
    } else if (mode == "classical") {
        const CircuitSpec c = load_circuit_file(file);
        rep = classical_run(c, input_index, r, total_energy);
    } else if (mode == "alternating") {
        const GateSpec gate = resolve_gate(gate_name, gate_file);
        const SystemSpec system = system_for_dim(gate.dim());
        std::mt19937_64 rng(seed);
        std::vector<Vector> inputs;
        for (int i = 0; i < 2 * m; ++i) inputs.push_back(haar_state(system.dim, rng));
        rep = alternating_experiment(gate.matrix, system, m, r, inputs, wc_opt);
        rep.circuit_label = gate.label;
    } else {
        throw std::invalid_argument("mode must be quantum, classical or alternating");
    }
    write_output(run_report_json(rep), out_path);
    if (mode == "classical") {
        std::cout << "outcome probabilities:\n";
        for (std::size_t y = 0; y < rep.outcome_distribution.size(); ++y)
            if (rep.outcome_distribution[y] > 1e-15)
                std::cout << "  " << y << ": " << fmt17(rep.outcome_distribution[y]) << "\n";
    }
    return 0;
}

int cmd_bounds(const GateSpec& gate, double eps, const std::string& measure, int trials, std::uint64_t seed,
               const std::string& out_path) {
    const SystemSpec system = system_for_dim(gate.dim());
    BoundReport rep;
    if (measure == "energy") {
        rep = make_energy_bound_report(gate.label, gate.matrix, system, eps);
    } else if (measure == "coherence") {
        rep = make_coherence_bound_report(gate.label, gate.matrix, eps, trials, seed);
    } else {
        throw std::invalid_argument("measure must be energy or coherence");
    }
    write_output(bound_report_json(rep), out_path);
    return 0;
}

int cmd_verify(std::uint64_t seed) {
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    // sine state invariants across the small grid
    {
        bool ok = true;
        for (int s = 1; s <= 4 && ok; ++s) {
            const SystemSpec sys = SystemSpec::ladder(s + 1);
            for (int r = 3; r <= 12 && ok; ++r) {
                const BatterySim b = sine_battery(sys, r);
                double norm2 = 0.0;
                for (double a : b.amplitudes) norm2 += a * a;
                ok = ok && std::abs(norm2 - 1.0) <= 1e-12;
                ok = ok && std::abs(b.mean_energy() - 0.5 * r * s) <= 1e-10;
                ok = ok && b.amplitudes.front() == 0.0 && b.amplitudes.back() == 0.0;
                for (int k = 0; k <= (r - 2) * s && ok; ++k)
                    ok = std::abs(b.amplitudes[static_cast<std::size_t>(s + k)] -
                                  b.amplitudes[static_cast<std::size_t>((r - 1) * s - k)]) <= 1e-12;
            }
        }
        check("sine battery normalization / mean / edges / symmetry", ok);
    }

    // structural invariants over random gate pairs
    std::mt19937_64 rng(seed);
    for (const int d : {2, 4}) {
        const SystemSpec sys = d == 2 ? SystemSpec::qubits(1) : SystemSpec::qubits(2);
        const BatterySim b = sine_battery(sys, 6);
        bool comp_ok = true, unit_ok = true, kraus_ok = true;
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix g1 = haar_unitary(d, rng);
            const Matrix g2 = haar_unitary(d, rng);
            comp_ok = comp_ok && composition_check(g1, g2, sys, b) <= 1e-12;
            const SectorDilation dil = build_dilation(g1, sys, b);
            const EOkInterval ok_int = e_ok(sys, b);
            for (int e = 0; e <= sys.norm() + b.capacity; ++e) {
                const auto basis = sector_basis(sys, b, e);
                const Matrix blk = dil.sector_block(e, basis);
                unit_ok = unit_ok &&
                          max_abs(Matrix(blk.adjoint() * blk) -
                                  Matrix::Identity(blk.rows(), blk.cols())) <= 1e-12;
                if (ok_int.contains(e) && static_cast<int>(basis.size()) != d) unit_ok = false;
            }
            const KrausChannel ch = induced_channel(dil, b);
            kraus_ok = kraus_ok &&
                       max_abs(ch.completeness() - Matrix::Identity(d, d)) <= 1e-10;
        }
        check("composition property (d=" + std::to_string(d) + ", 50 random pairs)", comp_ok);
        check("sector-block unitarity (d=" + std::to_string(d) + ")", unit_ok);
        check("Kraus completeness (d=" + std::to_string(d) + ")", kraus_ok);
    }

    // joint energy commutation on the dense debug path
    {
        const SystemSpec sys = SystemSpec::qubits(1);
        const BatterySim b = sine_battery(sys, 5);
        const SectorDilation dil = build_dilation(haar_unitary(2, rng), sys, b);
        const Matrix u = dil.dense_matrix(b);
        const EnergyObservable joint = joint_observable(sys, b);
        Matrix h = Matrix::Zero(u.rows(), u.cols());
        for (Eigen::Index i = 0; i < u.rows(); ++i) h(i, i) = joint.diagonal[static_cast<std::size_t>(i)];
        check("[U_G, H_tot] = 0 (dense path)", max_abs(u * h - h * u) <= 1e-12);
    }

    // classical-input exactness on a 2-qubit circuit
    {
        CircuitSpec c;
        c.n_qubits = 2;
        c.label = "verify";
        c.gates.push_back({"H", gates::hadamard(), {0}});
        c.gates.push_back({"CNOT", gates::cnot(), {0, 1}});
        const Matrix u = composed_unitary(c);
        bool ok = true;
        for (int r : {3, 10})
            for (int x = 0; x < 4 && ok; ++x) {
                const RunReport rep = classical_run(c, x, r);
                for (int y = 0; y < 4; ++y)
                    ok = ok && std::abs(rep.outcome_distribution[static_cast<std::size_t>(y)] -
                                        std::norm(u(y, x))) <= 1e-12;
            }
        check("classical-input exactness (2-qubit circuit, R in {3,10})", ok);
    }

    std::cout << (failures == 0 ? "verify: all checks passed\n" : "verify: FAILURES detected\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-preserving gate implementations on a quantum battery"};
    app.require_subcommand(1);

    std::string gate_name, gate_file, out_path, format = "csv", mode = "quantum", scan_range, measure =
                                                                                                  "energy";
    std::string circuit_file;
    int r_single = 0, m_rounds = 1, input_index = 0, total_energy = -1, trials = 64;
    std::vector<int> r_list;
    double eps = 1e-4;
    std::uint64_t seed = 0;
    WorstCaseOptions wc;

    auto add_gate_opts = [&](CLI::App* cmd) {
        cmd->add_option("--gate", gate_name, "built-in gate name (I,X,Y,Z,H,S,T,CNOT,CZ,SWAP,QFTn)");
        cmd->add_option("--gate-file", gate_file, "JSON matrix file");
    };
    auto add_solver_opts = [&](CLI::App* cmd) {
        cmd->add_option("--fw-max-iters", wc.max_iterations, "conditional-gradient iteration cap");
        cmd->add_option("--fw-tol", wc.gap_tolerance, "linearization gap tolerance");
        cmd->add_option("--probes", wc.probes, "random cross-validation probes");
    };

    CLI::App* sim = app.add_subcommand("simulate", "measure worst-case fidelity of one (gate, R) point");
    add_gate_opts(sim);
    sim->add_option("--R", r_single, "battery size parameter")->required();
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--out", out_path, "output file (default stdout)");
    add_solver_opts(sim);

    CLI::App* scan = app.add_subcommand("scan", "scan worst-case fidelity over a grid of R");
    add_gate_opts(scan);
    scan->add_option("--scan", scan_range, "R range start:stop:step");
    scan->add_option("--R", r_list, "explicit R values");
    scan->add_option("--seed", seed, "RNG seed");
    scan->add_option("--out", out_path, "output file (default stdout)");
    scan->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    add_solver_opts(scan);

    CLI::App* circ = app.add_subcommand("circuit", "run a battery-powered circuit");
    circ->add_option("--file", circuit_file, "circuit JSON file");
    add_gate_opts(circ);
    circ->add_option("--R", r_single, "battery size parameter")->required();
    circ->add_option("--mode", mode, "quantum, classical or alternating")
        ->check(CLI::IsMember({"quantum", "classical", "alternating"}));
    circ->add_option("--m", m_rounds, "alternating rounds (battery reused 2m times)");
    circ->add_option("--input", input_index, "basis input index");
    circ->add_option("--total-energy", total_energy, "classical mode: total energy E in E_ok");
    circ->add_option("--seed", seed, "RNG seed");
    circ->add_option("--out", out_path, "output file (default stdout)");
    add_solver_opts(circ);

    CLI::App* bnd = app.add_subcommand("bounds", "evaluate bound formulas for a (gate, epsilon) pair");
    add_gate_opts(bnd);
    bnd->add_option("--epsilon", eps, "target worst-case infidelity")->required();
    bnd->add_option("--measure", measure, "energy or coherence")
        ->check(CLI::IsMember({"energy", "coherence"}));
    bnd->add_option("--trials", trials, "sampling trials for coherence generation");
    bnd->add_option("--seed", seed, "RNG seed");
    bnd->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* ver = app.add_subcommand("verify", "run the structural invariant suite");
    ver->add_option("--seed", seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        wc.seed = seed;
        if (sim->parsed()) return cmd_simulate(resolve_gate(gate_name, gate_file), r_single, wc, out_path);
        if (scan->parsed())
            return cmd_scan(resolve_gate(gate_name, gate_file), parse_scan_grid(scan_range, r_list), wc,
                            out_path, format);
        if (circ->parsed())
            return cmd_circuit(circuit_file, gate_name, gate_file, r_single, mode, m_rounds, input_index,
                               total_energy, seed, wc, out_path);
        if (bnd->parsed()) return cmd_bounds(resolve_gate(gate_name, gate_file), eps, measure, trials, seed,
                                             out_path);
        if (ver->parsed()) return cmd_verify(seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
