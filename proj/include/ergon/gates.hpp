#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace ergon {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_unitary(const Matrix& g, double tol = 1e-10) {
    if (g.rows() != g.cols() || g.rows() == 0) return false;
    return max_abs(g.adjoint() * g - Matrix::Identity(g.rows(), g.cols())) <= tol;
}

struct GateSpec {
    std::string label;
    Matrix matrix;
    int dim() const { return static_cast<int>(matrix.rows()); }
};

namespace gates {

inline Matrix identity(int d = 2) { return Matrix::Identity(d, d); }

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline Matrix hadamard() {
    Matrix m(2, 2);
    const double r = 1.0 / std::numbers::sqrt2;
    m << r, r, r, -r;
    return m;
}

inline Matrix phase_s() {
    Matrix m(2, 2);
    m << 1, 0, 0, Complex(0, 1);
    return m;
}

inline Matrix phase_t() {
    Matrix m(2, 2);
    m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4);
    return m;
}

// Two-qubit gates index the basis as |q0 q1> with q0 the first target.
inline Matrix cnot() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
}

inline Matrix cz() {
    Matrix m = Matrix::Identity(4, 4);
    m(3, 3) = -1;
    return m;
}

inline Matrix swap() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
    return m;
}

inline Matrix qft(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 12) throw std::invalid_argument("qft: unsupported qubit count");
    const int d = 1 << n_qubits;
    Matrix m(d, d);
    const double r = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            m(j, k) = r * std::polar(1.0, 2.0 * std::numbers::pi * j * k / d);
    return m;
}

}  // namespace gates

// Built-in gate table: I, X, Y, Z, H, S, T, CNOT, CZ, SWAP and QFTn
// (e.g. QFT3 for the 3-qubit Fourier transform).
inline GateSpec named_gate(const std::string& name) {
    if (name == "I") return {name, gates::identity()};
    if (name == "X") return {name, gates::pauli_x()};
    if (name == "Y") return {name, gates::pauli_y()};
    if (name == "Z") return {name, gates::pauli_z()};
    if (name == "H") return {name, gates::hadamard()};
    if (name == "S") return {name, gates::phase_s()};
    if (name == "T") return {name, gates::phase_t()};
    if (name == "CNOT") return {name, gates::cnot()};
    if (name == "CZ") return {name, gates::cz()};
    if (name == "SWAP") return {name, gates::swap()};
    if (name.size() > 3 && name.rfind("QFT", 0) == 0) {
        int n = 0;
        try {
            std::size_t pos = 0;
            n = std::stoi(name.substr(3), &pos);
            if (pos != name.size() - 3) n = 0;
        } catch (const std::exception&) {
            n = 0;
        }
        if (n >= 1) return {name, gates::qft(n)};
    }
    throw std::invalid_argument("unknown gate name: " + name);
}

// Haar-distributed unitary via QR of a Ginibre matrix with the standard
// phase fix on the diagonal of R.
inline Matrix haar_unitary(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        Complex diag = r(i, i);
        q.col(i) *= (std::abs(diag) > 0) ? diag / std::abs(diag) : Complex(1, 0);
    }
    return q;
}

inline Vector haar_state(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = Complex(g(rng), g(rng));
    v.normalize();
    return v;
}

// Random full-rank density matrix (normalized Wishart).
inline Matrix random_density(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
    Matrix rho = z * z.adjoint();
    return rho / rho.trace().real();
}

inline void validate_density(const Matrix& rho, double tol = 1e-10) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    if (max_abs(rho - rho.adjoint()) > tol) throw std::invalid_argument("density matrix must be Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
        throw std::invalid_argument("density matrix must have unit trace");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
        throw std::invalid_argument("density matrix must be positive semidefinite");
}

}  // namespace ergon
