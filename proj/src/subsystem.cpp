// subsystem.cpp — see subsystem.hpp

#include "qfp/subsystem.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace qfp {

namespace {

// Stacked commutator matrices larger than this (in entries) go through the Gram
// matrix instead of a direct SVD.
constexpr double kDirectSvdBudget = 4.0e6;

constexpr double kSvdZeroRel = 1e-9;
constexpr double kGramZeroRel = 1e-7;  // Gram eigenvalues resolve σ only to ~√ε·σ_max
constexpr double kAmbiguousRel = 1e-6;

// X ↦ VX − XV as a d²×d² matrix.
ComplexMatrix commutator_matrix(const ComplexMatrix& v) {
    return commutator_superop(v).matrix();
}

// Real orthonormal recombination of a complex-closed set of matrices into a
// Hermitian Hilbert-Schmidt orthonormal basis of the same span.
std::vector<ComplexMatrix> hermitian_basis(const std::vector<ComplexMatrix>& span, Index d) {
    const Index r = static_cast<Index>(span.size());
    if (r == 0) return {};
    const Index n = d * d;
    Eigen::MatrixXd stacked(2 * n, 2 * r);
    for (Index a = 0; a < r; ++a) {
        const ComplexMatrix h1 = 0.5 * (span[a] + span[a].adjoint());
        const ComplexMatrix h2 = (span[a] - span[a].adjoint()) / cplx(0.0, 2.0);
        const ComplexVector v1 = vectorize(h1);
        const ComplexVector v2 = vectorize(h2);
        stacked.col(2 * a).head(n) = v1.real();
        stacked.col(2 * a).tail(n) = v1.imag();
        stacked.col(2 * a + 1).head(n) = v2.real();
        stacked.col(2 * a + 1).tail(n) = v2.imag();
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
    const RealVector& sv = svd.singularValues();
    if (sv(r - 1) <= 1e-8 * sv(0)) {
        throw ContractViolation("hermitian_basis: span is not closed under adjoint", sv(r - 1) / sv(0));
    }
    std::vector<ComplexMatrix> basis;
    basis.reserve(static_cast<std::size_t>(r));
    for (Index a = 0; a < r; ++a) {
        ComplexVector v(n);
        for (Index k = 0; k < n; ++k) {
            v(k) = cplx(svd.matrixU()(k, a), svd.matrixU()(n + k, a));
        }
        ComplexMatrix h = devectorize(v, d, d);
        basis.push_back(0.5 * (h + h.adjoint()));
    }
    return basis;
}

}  // namespace

// --------------------------- KrausFamily ----------------------------------

ComplexMatrix KrausFamily::project(const ComplexMatrix& x) const {
    ComplexMatrix y = ComplexMatrix::Zero(dim, dim);
    for (const auto& v : operators) y.noalias() += v.adjoint() * x * v;
    return y;
}

ComplexMatrix KrausFamily::project_state(const ComplexMatrix& rho) const {
    ComplexMatrix y = ComplexMatrix::Zero(dim, dim);
    for (const auto& v : operators) y.noalias() += v * rho * v.adjoint();
    return y;
}

Superoperator KrausFamily::heisenberg_superop() const {
    if (operators.empty()) return Superoperator::zero(dim);
    std::vector<ComplexMatrix> left, right;
    for (const auto& v : operators) {
        left.push_back(v.transpose());
        right.push_back(v.adjoint());
    }
    return Superoperator(kron_sum(left, right));
}

KrausFamily sector_family(std::span<const int> sector_dims) {
    if (sector_dims.empty()) throw std::invalid_argument("sector_family: empty sector list");
    Index d = 0;
    for (int s : sector_dims) {
        if (s <= 0) throw std::invalid_argument("sector_family: sector dimensions must be positive");
        d += s;
    }
    KrausFamily k{d, {}};
    Index offset = 0;
    for (int s : sector_dims) {
        ComplexMatrix p = ComplexMatrix::Zero(d, d);
        p.block(offset, offset, s, s).setIdentity();
        k.operators.push_back(std::move(p));
        offset += s;
    }
    return k;
}

KrausFamily partial_trace_family(Index dim_a, const HermitianOperator& bath_state) {
    if (dim_a <= 0) throw std::invalid_argument("partial_trace_family: dim_A must be positive");
    const EigenSystem es = hermitian_eig(bath_state);
    const double lo = es.values.minCoeff();
    if (lo < -1e-12) {
        throw ContractViolation("partial_trace_family: bath state is not positive semidefinite", lo);
    }
    const double tr = bath_state.matrix().trace().real();
    if (std::abs(tr - 1.0) > 1e-10) {
        throw ContractViolation("partial_trace_family: bath state trace is not 1", tr);
    }
    const Index db = bath_state.dim();
    const ComplexMatrix id_a = identity(dim_a);
    KrausFamily k{dim_a * db, {}};
    k.operators.reserve(static_cast<std::size_t>(db * db));
    for (Index alpha = 0; alpha < db; ++alpha) {
        for (Index beta = 0; beta < db; ++beta) {
            // √ω |φ_β⟩⟨φ_α| = √p_β |φ_β⟩⟨φ_α|
            const double w = std::sqrt(std::max(es.values(beta), 0.0));
            const ComplexMatrix b = w * es.vectors.col(beta) * es.vectors.col(alpha).adjoint();
            k.operators.push_back(kron(id_a, b));
        }
    }
    return k;
}

ComplexMatrix partial_trace_b(const ComplexMatrix& rho, Index dim_a, Index dim_b) {
    if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b) {
        throw DimensionMismatch("partial_trace_b: operator does not act on H_A (x) H_B");
    }
    ComplexMatrix out = ComplexMatrix::Zero(dim_a, dim_a);
    for (Index i = 0; i < dim_a; ++i) {
        for (Index j = 0; j < dim_a; ++j) {
            cplx s = 0.0;
            for (Index k = 0; k < dim_b; ++k) s += rho(i * dim_b + k, j * dim_b + k);
            out(i, j) = s;
        }
    }
    return out;
}

// --------------------------- Commutant -------------------------------------

CommutantResult commutant_with_report(const KrausFamily& k) {
    const Index d = k.dim;
    const Index n = d * d;
    if (d <= 0) throw std::invalid_argument("commutant: empty family dimension");

    CommutantResult out;
    std::vector<ComplexMatrix> null_vectors;
    const auto m = static_cast<Index>(k.operators.size());
    double zero_rel = kSvdZeroRel;

    if (m == 0) {
        for (Index c = 0; c < n; ++c) null_vectors.push_back(devectorize(ComplexVector::Unit(n, c), d, d));
        out.singular_values = RealVector::Zero(n);
    } else if (static_cast<double>(2 * m * n) * static_cast<double>(n) <= kDirectSvdBudget) {
        ComplexMatrix stacked(2 * m * n, n);
        for (Index a = 0; a < m; ++a) {
            stacked.block(2 * a * n, 0, n, n) = commutator_matrix(k.operators[a]);
            stacked.block((2 * a + 1) * n, 0, n, n) = commutator_matrix(k.operators[a].adjoint());
        }
        Eigen::BDCSVD<ComplexMatrix> svd(stacked, Eigen::ComputeFullV);
        const RealVector sv = svd.singularValues();  // descending
        out.singular_values = sv.reverse();
        const double smax = sv(0);
        const double cut = zero_rel * std::max(smax, 1e-300);
        out.zero_threshold = cut;
        for (Index c = 0; c < n; ++c) {
            if (sv(c) <= cut) null_vectors.push_back(devectorize(svd.matrixV().col(c), d, d));
        }
    } else {
        // Σ C†C over all commutator maps: L_S + R_S − 2 Σ (X ↦ V†XV + VXV†)
        zero_rel = kGramZeroRel;
        ComplexMatrix s = ComplexMatrix::Zero(d, d);
        std::vector<ComplexMatrix> left, right;
        for (const auto& v : k.operators) {
            s += v.adjoint() * v + v * v.adjoint();
            left.push_back(v.transpose());
            right.push_back(v.adjoint());
            left.push_back(v.conjugate());
            right.push_back(v);
        }
        ComplexMatrix gram = -2.0 * kron_sum(left, right);
        const ComplexMatrix id = identity(d);
        gram += kron(id, s) + kron(s.transpose(), id);

        // The Gram map sends Hermitian X to Hermitian G(X), so in the real basis
        // {E_ii, (E_ij+E_ji)/√2, i(E_ij−E_ji)/√2} it is a real symmetric matrix.
        struct Unit {
            Index p, q;
            cplx bp, bq;
        };
        std::vector<Unit> units;
        const double h = std::sqrt(0.5);
        for (Index j = 0; j < d; ++j) {
            for (Index i = 0; i <= j; ++i) {
                const Index p = i + j * d;
                const Index q = j + i * d;
                if (i == j) {
                    units.push_back({p, p, 1.0, 0.0});
                } else {
                    units.push_back({p, q, h, h});
                    units.push_back({p, q, cplx(0.0, h), cplx(0.0, -h)});
                }
            }
        }
        Eigen::MatrixXd real_gram(n, n);
        for (Index l = 0; l < n; ++l) {
            const Unit& ul = units[static_cast<std::size_t>(l)];
            for (Index k = 0; k < n; ++k) {
                const Unit& uk = units[static_cast<std::size_t>(k)];
                const cplx v = std::conj(uk.bp) * (gram(uk.p, ul.p) * ul.bp + gram(uk.p, ul.q) * ul.bq) +
                               std::conj(uk.bq) * (gram(uk.q, ul.p) * ul.bp + gram(uk.q, ul.q) * ul.bq);
                real_gram(k, l) = v.real();
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(real_gram);
        const RealVector mu = es.eigenvalues();  // ascending
        out.singular_values = mu.cwiseMax(0.0).cwiseSqrt();
        const double smax = out.singular_values(n - 1);
        const double cut = zero_rel * std::max(smax, 1e-300);
        out.zero_threshold = cut;
        for (Index c = 0; c < n; ++c) {
            if (out.singular_values(c) > cut) continue;
            ComplexMatrix x = ComplexMatrix::Zero(d, d);
            for (Index k = 0; k < n; ++k) {
                const Unit& u = units[static_cast<std::size_t>(k)];
                const double w = es.eigenvectors()(k, c);
                x(u.p % d, u.p / d) += w * u.bp;
                x(u.q % d, u.q / d) += w * u.bq;
            }
            null_vectors.push_back(std::move(x));
        }
    }

    // Reject an ill-determined rank decision.
    if (m > 0) {
        const RealVector& sv = out.singular_values;
        const double smax = sv(sv.size() - 1);
        double smallest_kept = smax;
        for (Index c = 0; c < sv.size(); ++c) {
            const double rel = sv(c) / smax;
            if (rel > zero_rel && rel <= kAmbiguousRel) {
                throw ContractViolation("commutant: singular value " + std::to_string(rel) +
                                            " (relative) lies in the ambiguous band; nullspace is ill-determined",
                                        rel);
            }
            if (rel > zero_rel) smallest_kept = std::min(smallest_kept, sv(c));
        }
        out.gap = smallest_kept / smax;
    }

    out.basis = hermitian_basis(null_vectors, d);
    return out;
}

std::vector<ComplexMatrix> commutant(const KrausFamily& k) {
    return commutant_with_report(k).basis;
}

// --------------------------- PhysicalSubsystem ------------------------------

PhysicalSubsystem::PhysicalSubsystem(KrausFamily k, std::vector<ComplexMatrix> basis)
    : kraus_(std::move(k)), basis_(std::move(basis)) {
    heisenberg_ = kraus_.heisenberg_superop();
    schrodinger_ = heisenberg_.trace_adjoint();
    const Index d = kraus_.dim;
    embedding_.resize(d * d, static_cast<Index>(basis_.size()));
    for (std::size_t a = 0; a < basis_.size(); ++a) embedding_.col(static_cast<Index>(a)) = vectorize(basis_[a]);
}

PhysicalSubsystem PhysicalSubsystem::unchecked(KrausFamily k) {
    auto basis = commutant(k);
    return PhysicalSubsystem(std::move(k), std::move(basis));
}

ComplexMatrix PhysicalSubsystem::project(const ComplexMatrix& x) const {
    return kraus_.project(x);
}

ComplexMatrix PhysicalSubsystem::project_state(const ComplexMatrix& rho) const {
    return kraus_.project_state(rho);
}

ComplexVector PhysicalSubsystem::coordinates(const ComplexMatrix& x) const {
    return embedding_.adjoint() * vectorize(x);
}

double PhysicalSubsystem::distance_from_subalgebra(const ComplexMatrix& x) const {
    const ComplexVector v = vectorize(x);
    const ComplexVector residual = v - embedding_ * (embedding_.adjoint() * v);
    return residual.size() == 0 ? 0.0 : residual.cwiseAbs().maxCoeff();
}

bool PhysicalSubsystem::contains(const ComplexMatrix& x, double tol) const {
    return distance_from_subalgebra(x) <= tol * (1.0 + max_abs(x));
}

PhysicalSubsystem build_projection(KrausFamily k) {
    if (k.dim <= 0 || k.operators.empty()) {
        throw std::invalid_argument("build_projection: empty Kraus family");
    }
    for (const auto& v : k.operators) {
        if (v.rows() != k.dim || v.cols() != k.dim) {
            throw DimensionMismatch("build_projection: Kraus operator has wrong shape");
        }
    }
    const Index d = k.dim;
    const double unit_err = max_abs(k.project(identity(d)) - identity(d));
    if (unit_err > kStructuralTol) {
        throw ContractViolation("build_projection: family is not unital, ||P0(1) - 1|| = " +
                                    std::to_string(unit_err),
                                unit_err);
    }
    const Superoperator p = k.heisenberg_superop();
    const double idem_err = max_abs(p.matrix() * p.matrix() - p.matrix());
    if (idem_err > kStructuralTol) {
        throw ContractViolation("build_projection: family is not idempotent, ||P0^2 - P0|| = " +
                                    std::to_string(idem_err),
                                idem_err);
    }
    auto basis = commutant(k);
    PhysicalSubsystem s(std::move(k), std::move(basis));

    // Image of P₀ equals span(commutant): basis elements are fixed, and rank P₀ = r.
    double fixed_err = 0.0;
    for (const auto& x : s.commutant_basis()) fixed_err = std::max(fixed_err, max_abs(s.project(x) - x));
    if (fixed_err > 1e-9) {
        throw ContractViolation("build_projection: commutant element not fixed by P0", fixed_err);
    }
    const double rank = p.matrix().trace().real();
    if (std::abs(rank - static_cast<double>(s.subalgebra_dim())) > 1e-6) {
        throw ContractViolation("build_projection: rank of P0 differs from commutant dimension",
                                std::abs(rank - static_cast<double>(s.subalgebra_dim())));
    }
    return s;
}

// --------------------------- Validation ------------------------------------

bool ValidationReport::all_passed() const {
    return std::all_of(axioms.begin(), axioms.end(), [](const AxiomResult& a) { return a.passed; });
}

const AxiomResult& ValidationReport::axiom(const std::string& name) const {
    for (const auto& a : axioms) {
        if (a.name == name) return a;
    }
    throw std::out_of_range("ValidationReport: no axiom named " + name);
}

ValidationReport validate_cppnce(const PhysicalSubsystem& s, int sample_count, Rng& rng) {
    const Index d = s.dim();
    const Index n = d * d;
    const ComplexMatrix& p = s.heisenberg_projection().matrix();
    ValidationReport report;

    // Adjointness
    {
        double w = 0.0;
        for (int i = 0; i < sample_count; ++i) {
            const ComplexMatrix x = random_complex(d, rng);
            const double r = max_abs(s.project(x.adjoint()) - s.project(x).adjoint());
            w = std::max(w, r / (1.0 + max_abs(x)));
        }
        report.axioms.push_back({"adjointness", w <= kStructuralTol, w, ""});
    }

    // Fixed points: P₀(X) = X ⇔ X ∈ span(commutant basis)
    {
        double forward = 0.0;
        for (const auto& x : s.commutant_basis()) forward = std::max(forward, max_abs(s.project(x) - x));
        const ComplexMatrix shifted = p - ComplexMatrix::Identity(n, n);
        Eigen::BDCSVD<ComplexMatrix> svd(shifted, Eigen::ComputeFullV);
        const RealVector& sv = svd.singularValues();
        const double cut = 1e-9 * std::max(1.0, sv(0));
        double reverse = 0.0;
        Index fixed_dim = 0;
        for (Index c = 0; c < n; ++c) {
            if (sv(c) <= cut) {
                ++fixed_dim;
                reverse = std::max(reverse, s.distance_from_subalgebra(devectorize(svd.matrixV().col(c), d, d)));
            }
        }
        const double dim_gap = std::abs(static_cast<double>(fixed_dim - s.subalgebra_dim()));
        const double w = std::max({forward, reverse, dim_gap});
        report.axioms.push_back({"fixed_points", w <= 1e-9, w,
                                 "fixed-point space dim " + std::to_string(fixed_dim) + ", commutant dim " +
                                     std::to_string(s.subalgebra_dim())});
    }

    // Complete positivity via the Choi matrix
    {
        const ComplexMatrix c = choi_matrix(s.heisenberg_projection());
        const PsdCheck chk = is_psd(HermitianOperator::symmetrized(c), kPsdSlack);
        report.axioms.push_back({"complete_positivity", chk.psd, chk.min_eigenvalue, "min Choi eigenvalue"});
    }

    // Bimodule property with X₁, X₂ drawn from the image of P₀
    {
        double w = 0.0;
        for (int i = 0; i < sample_count; ++i) {
            const ComplexMatrix x1 = s.project(random_complex(d, rng));
            const ComplexMatrix x2 = s.project(random_complex(d, rng));
            const ComplexMatrix y = random_complex(d, rng);
            const ComplexMatrix lhs = s.project(x1 * y * x2);
            const ComplexMatrix rhs = x1 * s.project(y) * x2;
            w = std::max(w, max_abs(lhs - rhs) / (1.0 + max_abs(lhs)));
        }
        report.axioms.push_back({"bimodule", w <= kStructuralTol, w, ""});
    }

    // Idempotence (projecting conditional expectation)
    {
        const double w = max_abs(p * p - p);
        report.axioms.push_back({"projection", w <= kStructuralTol, w, ""});
    }

    report.axioms.push_back({"normality", true, 0.0, "automatic in finite dimension; not tested"});
    return report;
}

// --------------------------- Serialization ---------------------------------

void write_kraus_family(std::ostream& os, const KrausFamily& k) {
    os << k.operators.size() << '\n';
    for (const auto& v : k.operators) write_matrix(os, v);
}

KrausFamily read_kraus_family(std::istream& is) {
    long long count = 0;
    if (!(is >> count) || count <= 0) {
        throw std::invalid_argument("read_kraus_family: missing or non-positive operator count");
    }
    KrausFamily k;
    for (long long i = 0; i < count; ++i) {
        ComplexMatrix v = read_matrix(is);
        if (v.rows() != v.cols()) throw DimensionMismatch("read_kraus_family: operator is not square");
        if (i == 0) k.dim = v.rows();
        if (v.rows() != k.dim) throw DimensionMismatch("read_kraus_family: operators differ in size");
        k.operators.push_back(std::move(v));
    }
    return k;
}

}  // namespace qfp
