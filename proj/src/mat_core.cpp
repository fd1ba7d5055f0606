// mat_core.cpp — see mat_core.hpp

#include "qfp/mat_core.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace qfp {

namespace {

void require_square(const ComplexMatrix& m, const char* who) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch(std::string(who) + ": matrix must be square, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

Index isqrt_exact(Index n, const char* who) {
    const auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (r * r != n) {
        throw DimensionMismatch(std::string(who) + ": length " + std::to_string(n) +
                                " is not a perfect square");
    }
    return r;
}

}  // namespace

ContractViolation::ContractViolation(const std::string& what, double witness)
    : std::invalid_argument(what), witness_(witness) {}

double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

double hermitian_deviation(const ComplexMatrix& m) {
    require_square(m, "hermitian_deviation");
    return max_abs(m - m.adjoint());
}

ComplexMatrix identity(Index d) {
    return ComplexMatrix::Identity(d, d);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix k = Eigen::kroneckerProduct(a, b);
    return k;
}

ComplexMatrix kron_sum(const std::vector<ComplexMatrix>& xs, const std::vector<ComplexMatrix>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw DimensionMismatch("kron_sum: factor lists differ or are empty");
    const Index xr = xs[0].rows(), xc = xs[0].cols();
    const Index yr = ys[0].rows(), yc = ys[0].cols();
    const auto m = static_cast<Index>(xs.size());
    // Realignment: R[(i,k),(j,l)] = Σ X(i,k) Y(j,l) is a rank-m product.
    ComplexMatrix a(xr * xc, m);
    ComplexMatrix b(yr * yc, m);
    for (Index t = 0; t < m; ++t) {
        const auto& x = xs[static_cast<std::size_t>(t)];
        const auto& y = ys[static_cast<std::size_t>(t)];
        if (x.rows() != xr || x.cols() != xc || y.rows() != yr || y.cols() != yc) {
            throw DimensionMismatch("kron_sum: factors differ in shape");
        }
        a.col(t) = Eigen::Map<const ComplexVector>(x.data(), xr * xc);
        b.col(t) = Eigen::Map<const ComplexVector>(y.data(), yr * yc);
    }
    const ComplexMatrix r = a * b.transpose();
    ComplexMatrix out(xr * yr, xc * yc);
    for (Index l = 0; l < yc; ++l)
        for (Index k = 0; k < xc; ++k)
            for (Index j = 0; j < yr; ++j)
                for (Index i = 0; i < xr; ++i) out(i * yr + j, k * yc + l) = r(i + k * xr, j + l * yr);
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b + b * a;
}

ComplexMatrix unit_matrix(Index d, Index i, Index j) {
    if (i < 0 || j < 0 || i >= d || j >= d) {
        throw std::out_of_range("unit_matrix: index out of range");
    }
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0.0, -kI,
         kI, 0.0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0,
         0.0, -1.0;
    return m;
}

// --------------------------- HermitianOperator ------------------------------

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
    require_square(m_, "HermitianOperator");
    if (!all_finite(m_)) {
        throw ContractViolation("HermitianOperator: non-finite entry",
                                std::numeric_limits<double>::infinity());
    }
    const double asym = hermitian_deviation(m_);
    if (asym > 1e-12 * (1.0 + max_abs(m_))) {
        throw ContractViolation("HermitianOperator: matrix is not Hermitian (max |M - M^dagger| = " +
                                    std::to_string(asym) + ")",
                                asym);
    }
}

HermitianOperator HermitianOperator::symmetrized(const ComplexMatrix& m) {
    require_square(m, "HermitianOperator::symmetrized");
    ComplexMatrix h = 0.5 * (m + m.adjoint());
    return HermitianOperator(std::move(h), Unchecked{});
}

// --------------------------- Eigensystem -----------------------------------

ComplexMatrix EigenSystem::to_eigen(const ComplexMatrix& lab) const {
    if (lab.rows() != dim() || lab.cols() != dim()) {
        throw DimensionMismatch("EigenSystem::to_eigen: dimension mismatch");
    }
    return vectors.adjoint() * lab * vectors;
}

ComplexMatrix EigenSystem::to_lab(const ComplexMatrix& eig) const {
    if (eig.rows() != dim() || eig.cols() != dim()) {
        throw DimensionMismatch("EigenSystem::to_lab: dimension mismatch");
    }
    return vectors * eig * vectors.adjoint();
}

Eigen::MatrixXd EigenSystem::bohr_frequencies() const {
    const Index d = dim();
    Eigen::MatrixXd delta(d, d);
    for (Index n = 0; n < d; ++n) {
        for (Index m = 0; m < d; ++m) {
            delta(m, n) = values(m) - values(n);
        }
    }
    return delta;
}

EigenSystem hermitian_eig(const HermitianOperator& m) {
    if (m.dim() == 0) {
        throw DimensionMismatch("hermitian_eig: empty matrix");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("hermitian_eig: eigensolver did not converge");
    }
    return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm(const ComplexMatrix& m) {
    require_square(m, "expm");
    if (m.size() == 0) return m;
    if (max_abs(m) == 0.0) return identity(m.rows());
    ComplexMatrix e = m.exp();
    return e;
}

// --------------------------- Vectorization --------------------------------

ComplexVector vectorize(const ComplexMatrix& x) {
    return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

ComplexMatrix devectorize(const ComplexVector& v, Index rows, Index cols) {
    if (rows * cols != v.size()) {
        throw DimensionMismatch("devectorize: length " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
    }
    return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

ComplexMatrix devectorize(const ComplexVector& v) {
    const Index d = isqrt_exact(v.size(), "devectorize");
    return devectorize(v, d, d);
}

// --------------------------- Superoperator --------------------------------

Superoperator::Superoperator(ComplexMatrix matrix) : m_(std::move(matrix)) {
    require_square(m_, "Superoperator");
    dim_ = isqrt_exact(m_.rows(), "Superoperator");
}

Superoperator Superoperator::identity(Index d) {
    return Superoperator(ComplexMatrix::Identity(d * d, d * d));
}

Superoperator Superoperator::zero(Index d) {
    return Superoperator(ComplexMatrix::Zero(d * d, d * d));
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) {
        throw DimensionMismatch("Superoperator::apply: operator is " + std::to_string(x.rows()) +
                                "x" + std::to_string(x.cols()) + ", expected " +
                                std::to_string(dim_) + "x" + std::to_string(dim_));
    }
    ComplexVector y = m_ * vectorize(x);
    return devectorize(y, dim_, dim_);
}

Superoperator Superoperator::trace_adjoint() const {
    // Tr(ρX) = vec(ρᵀ)ᵀ vec(X), hence S* = T Sᵀ T with T the transpose map.
    const Index d = dim_;
    ComplexMatrix adj(d * d, d * d);
    for (Index c = 0; c < d * d; ++c) {
        const Index ci = c % d, cj = c / d;
        const Index ct = cj + ci * d;
        for (Index r = 0; r < d * d; ++r) {
            const Index ri = r % d, rj = r / d;
            const Index rt = rj + ri * d;
            adj(r, c) = m_(ct, rt);
        }
    }
    return Superoperator(std::move(adj));
}

Superoperator operator*(const Superoperator& a, const Superoperator& b) {
    if (a.dim_ != b.dim_) throw DimensionMismatch("Superoperator composition: dimension mismatch");
    return Superoperator(a.m_ * b.m_);
}

Superoperator operator+(const Superoperator& a, const Superoperator& b) {
    if (a.dim_ != b.dim_) throw DimensionMismatch("Superoperator sum: dimension mismatch");
    return Superoperator(a.m_ + b.m_);
}

Superoperator operator-(const Superoperator& a, const Superoperator& b) {
    if (a.dim_ != b.dim_) throw DimensionMismatch("Superoperator difference: dimension mismatch");
    return Superoperator(a.m_ - b.m_);
}

Superoperator operator*(cplx s, const Superoperator& a) {
    return Superoperator(s * a.m_);
}

Superoperator sandwich_superop(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "sandwich_superop");
    require_square(b, "sandwich_superop");
    if (a.rows() != b.rows()) throw DimensionMismatch("sandwich_superop: A and B differ in size");
    return Superoperator(kron(b.transpose(), a));
}

Superoperator commutator_superop(const ComplexMatrix& h) {
    require_square(h, "commutator_superop");
    const ComplexMatrix id = identity(h.rows());
    return Superoperator(kron(id, h) - kron(h.transpose(), id));
}

Superoperator anticommutator_superop(const ComplexMatrix& a) {
    require_square(a, "anticommutator_superop");
    const ComplexMatrix id = identity(a.rows());
    return Superoperator(kron(id, a) + kron(a.transpose(), id));
}

Superoperator transpose_superop(Index d) {
    ComplexMatrix t = ComplexMatrix::Zero(d * d, d * d);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) {
            t(j + i * d, i + j * d) = 1.0;
        }
    }
    return Superoperator(std::move(t));
}

ComplexMatrix choi_matrix(const Superoperator& s) {
    const Index d = s.dim();
    ComplexMatrix c(d * d, d * d);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) {
            // S(E_ij) is the column of S at vec index i + j d.
            const ComplexVector col = s.matrix().col(i + j * d);
            c.block(i * d, j * d, d, d) = devectorize(col, d, d);
        }
    }
    return c;
}

PsdCheck is_psd(const HermitianOperator& m, double tol) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
    const RealVector& ev = solver.eigenvalues();
    const double lo = ev.minCoeff();
    const double norm = std::max(std::abs(lo), std::abs(ev.maxCoeff()));
    return PsdCheck{lo >= -tol * (1.0 + norm), lo};
}

double trace_norm(const HermitianOperator& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
}

// --------------------------- Random samples --------------------------------

ComplexMatrix random_complex(Index d, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexMatrix m(d, d);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            m(i, j) = cplx(re, im);
        }
    }
    return m;
}

HermitianOperator random_hermitian(Index d, Rng& rng) {
    return HermitianOperator::symmetrized(random_complex(d, rng));
}

ComplexMatrix random_unitary(Index d, Rng& rng) {
    const ComplexMatrix g = random_complex(d, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < d; ++k) {
        const cplx diag = r(k, k);
        const double mag = std::abs(diag);
        if (mag > 0.0) q.col(k) *= diag / mag;
    }
    return q;
}

HermitianOperator random_density(Index d, Rng& rng) {
    const ComplexMatrix g = random_complex(d, rng);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return HermitianOperator::symmetrized(rho);
}

// --------------------------- Interchange format ----------------------------

void write_matrix(std::ostream& os, const ComplexMatrix& m) {
    const auto old_flags = os.flags();
    const auto old_prec = os.precision();
    os << m.rows() << ' ' << m.cols() << '\n';
    os << std::setprecision(17);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) os << "  ";
            os << m(i, j).real() << ' ' << m(i, j).imag();
        }
        os << '\n';
    }
    os.flags(old_flags);
    os.precision(old_prec);
}

ComplexMatrix read_matrix(std::istream& is) {
    long long rows = 0, cols = 0;
    if (!(is >> rows >> cols)) {
        throw std::invalid_argument("read_matrix: missing 'rows cols' header");
    }
    if (rows <= 0 || cols <= 0) {
        throw std::invalid_argument("read_matrix: dimensions must be positive");
    }
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            double re = 0.0, im = 0.0;
            if (!(is >> re >> im)) {
                throw std::invalid_argument("read_matrix: expected " + std::to_string(rows * cols) +
                                            " 're im' pairs, input ended at entry (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
            m(i, j) = cplx(re, im);
        }
    }
    return m;
}

std::string format_matrix(const ComplexMatrix& m) {
    std::ostringstream os;
    write_matrix(os, m);
    return os.str();
}

ComplexMatrix parse_matrix(const std::string& text) {
    std::istringstream is(text);
    ComplexMatrix m = read_matrix(is);
    std::string extra;
    if (is >> extra) {
        throw std::invalid_argument("parse_matrix: trailing token '" + extra + "'");
    }
    return m;
}

}  // namespace qfp
