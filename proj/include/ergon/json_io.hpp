#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergon/bounds.hpp"
#include "ergon/circuits.hpp"
#include "ergon/fidelity.hpp"
#include "ergon/gates.hpp"
#include "ergon/spectra.hpp"

// File formats: JSON parsing of gates, circuits and specs (nlohmann), and
// hand-rolled report writers so floating-point output is byte-stable with a
// fixed 17-significant-digit format.

namespace ergon {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt17(Complex v) { return "[" + fmt17(v.real()) + "," + fmt17(v.imag()) + "]"; }

// ---- parsing ---------------------------------------------------------------

inline SystemSpec parse_system(const nlohmann::json& j) {
    if (j.contains("n_qubits")) return SystemSpec::qubits(j.at("n_qubits").get<int>());
    if (j.contains("energies")) return SystemSpec::from_energies(j.at("energies").get<std::vector<int>>());
    throw std::invalid_argument("system spec needs n_qubits or energies");
}

inline BatterySim parse_battery(const nlohmann::json& j, const SystemSpec& system) {
    return sine_battery(system, j.at("R").get<int>());
}

// Matrix file: {"dim": d, "matrix": [[[re,im], ...], ...]}, row-major.
inline Matrix parse_matrix(const nlohmann::json& j) {
    const int d = j.at("dim").get<int>();
    if (d < 1) throw std::invalid_argument("matrix file: bad dimension");
    const auto& rows = j.at("matrix");
    if (static_cast<int>(rows.size()) != d) throw std::invalid_argument("matrix file: row count mismatch");
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<int>(row.size()) != d)
            throw std::invalid_argument("matrix file: column count mismatch");
        for (int c = 0; c < d; ++c) {
            const auto& entry = row.at(static_cast<std::size_t>(c));
            if (entry.size() != 2) throw std::invalid_argument("matrix file: entries must be [re, im]");
            m(r, c) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    }
    return m;
}

inline GateSpec load_gate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open gate file: " + path);
    nlohmann::json j;
    in >> j;
    Matrix m = parse_matrix(j);
    if (!is_unitary(m)) throw std::invalid_argument("gate file is not unitary: " + path);
    return {std::filesystem::path(path).stem().string(), std::move(m)};
}

// Circuit file: {"qubits": n, "gates": [{"name": "H", "targets": [0]},
// {"matrix_file": "g.json", "targets": [0, 1]}, ...]}. Matrix files resolve
// relative to the circuit file's directory.
inline CircuitSpec load_circuit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open circuit file: " + path);
    nlohmann::json j;
    in >> j;
    CircuitSpec c;
    c.n_qubits = j.at("qubits").get<int>();
    c.label = std::filesystem::path(path).stem().string();
    const auto dir = std::filesystem::path(path).parent_path();
    for (const auto& gj : j.at("gates")) {
        CircuitGate g;
        g.targets = gj.at("targets").get<std::vector<int>>();
        if (gj.contains("name")) {
            const GateSpec spec = named_gate(gj.at("name").get<std::string>());
            g.label = spec.label;
            g.matrix = spec.matrix;
        } else if (gj.contains("matrix_file")) {
            const GateSpec spec = load_gate_file((dir / gj.at("matrix_file").get<std::string>()).string());
            g.label = spec.label;
            g.matrix = spec.matrix;
        } else {
            throw std::invalid_argument("circuit gate needs name or matrix_file");
        }
        c.gates.push_back(std::move(g));
    }
    validate_circuit(c);
    return c;
}

// ---- writers ----------------------------------------------------------------

inline std::string system_json(const SystemSpec& s) {
    std::ostringstream o;
    if (s.n_qubits > 0) {
        o << "{\"n_qubits\":" << s.n_qubits << "}";
    } else {
        o << "{\"energies\":[";
        for (std::size_t i = 0; i < s.energies.size(); ++i)
            o << (i ? "," : "") << s.energies[i];
        o << "]}";
    }
    return o.str();
}

inline std::string battery_json(const BatterySim& b, bool with_amplitudes = false) {
    std::ostringstream o;
    o << "{\"R\":" << b.R << ",\"capacity\":" << b.capacity;
    if (with_amplitudes) {
        o << ",\"amplitudes\":[";
        for (std::size_t i = 0; i < b.amplitudes.size(); ++i)
            o << (i ? "," : "") << fmt17(b.amplitudes[i]);
        o << "]";
    }
    o << "}";
    return o.str();
}

inline std::string fidelity_result_json(const FidelityResult& r) {
    std::ostringstream o;
    o << "{\"f_wc\":" << fmt17(r.f_wc) << ",\"epsilon\":" << fmt17(r.epsilon)
      << ",\"iterations\":" << r.iterations << ",\"gap\":" << fmt17(r.gap)
      << ",\"converged\":" << (r.converged ? "true" : "false") << ",\"witness\":[";
    for (Eigen::Index i = 0; i < r.witness.rows(); ++i)
        for (Eigen::Index j = 0; j < r.witness.cols(); ++j)
            o << ((i + j) ? "," : "") << fmt17(r.witness(i, j));
    o << "]}";
    return o.str();
}

inline std::string bound_report_json(const BoundReport& r) {
    std::ostringstream o;
    o << "{\"gate\":\"" << r.gate_label << "\",\"measure\":\"" << measure_name(r.measure)
      << "\",\"epsilon\":" << fmt17(r.epsilon) << ",\"lower_mean\":" << fmt17(r.lower_mean)
      << ",\"lower_capacity\":" << fmt17(r.lower_capacity)
      << ",\"achievable_mean\":" << fmt17(r.achievable_mean)
      << ",\"achievable_capacity\":" << fmt17(r.achievable_capacity) << ",\"m_star\":" << r.m_star
      << ",\"vacuous\":" << (r.vacuous ? "true" : "false") << "}";
    return o.str();
}

inline std::string run_report_json(const RunReport& r) {
    std::ostringstream o;
    o << "{\"mode\":\"" << r.mode << "\",\"circuit\":\"" << r.circuit_label << "\",\"qubits\":" << r.n_qubits
      << ",\"R\":" << r.R << ",\"fidelity\":" << fmt17(r.fidelity) << ",\"battery_trace\":[";
    for (std::size_t i = 0; i < r.trace.size(); ++i) o << (i ? "," : "") << fmt17(r.trace[i].battery_mean);
    o << "],\"total_energy_trace\":[";
    for (std::size_t i = 0; i < r.trace.size(); ++i) o << (i ? "," : "") << fmt17(r.trace[i].total_mean);
    o << "]";
    if (!r.outcome_distribution.empty()) {
        o << ",\"outcomes\":[";
        for (std::size_t i = 0; i < r.outcome_distribution.size(); ++i)
            o << (i ? "," : "") << fmt17(r.outcome_distribution[i]);
        o << "]";
    }
    if (!r.deviations.empty()) {
        o << ",\"deviations\":[";
        for (std::size_t i = 0; i < r.deviations.size(); ++i) o << (i ? "," : "") << fmt17(r.deviations[i]);
        o << "],\"cumulative_deviation\":" << fmt17(r.cumulative_deviation)
          << ",\"epsilon_single\":" << fmt17(r.epsilon_single)
          << ",\"bound_4m_sqrt_eps\":" << fmt17(r.bound_4m_sqrt_eps)
          << ",\"within_bound\":" << (r.within_bound ? "true" : "false");
    }
    o << "}";
    return o.str();
}

struct ScanRow {
    std::string gate;
    int R = 0;
    double mean_energy = 0.0;
    double f_wc = 0.0;
    double epsilon = 0.0;
    double analytic_epsilon = 0.0;
    double lower_bound_mean_energy = 0.0;
    double ratio = 0.0;
    std::string error;  // non-empty marks a failed grid point
};

inline const char* scan_csv_header() {
    return "gate,R,mean_energy,f_wc,epsilon,analytic_epsilon,lower_bound_mean_energy,ratio";
}

inline std::string scan_csv_row(const ScanRow& r) {
    std::ostringstream o;
    o << r.gate << "," << r.R << ",";
    if (!r.error.empty()) {
        o << "error,error,error,error,error,error";
        return o.str();
    }
    o << fmt17(r.mean_energy) << "," << fmt17(r.f_wc) << "," << fmt17(r.epsilon) << ","
      << fmt17(r.analytic_epsilon) << "," << fmt17(r.lower_bound_mean_energy) << "," << fmt17(r.ratio);
    return o.str();
}

inline std::string scan_row_json(const ScanRow& r) {
    std::ostringstream o;
    o << "{\"gate\":\"" << r.gate << "\",\"R\":" << r.R;
    if (!r.error.empty()) {
        o << ",\"error\":\"" << r.error << "\"}";
        return o.str();
    }
    o << ",\"mean_energy\":" << fmt17(r.mean_energy) << ",\"f_wc\":" << fmt17(r.f_wc)
      << ",\"epsilon\":" << fmt17(r.epsilon) << ",\"analytic_epsilon\":" << fmt17(r.analytic_epsilon)
      << ",\"lower_bound_mean_energy\":" << fmt17(r.lower_bound_mean_energy)
      << ",\"ratio\":" << fmt17(r.ratio) << "}";
    return o.str();
}

}  // namespace ergon
