// coarse_grain.cpp — see coarse_grain.hpp

#include "qfp/coarse_grain.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_dawson.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace qfp {

void CoarseGrainSchedule::validate() const {
    if (!(xi > 0.0 && xi < 2.0)) {
        throw ContractViolation("schedule: xi must satisfy 0 < xi < 2, got " + std::to_string(xi), xi);
    }
    if (!(T_ref > 0.0)) {
        throw ContractViolation("schedule: T_ref must be positive, got " + std::to_string(T_ref), T_ref);
    }
    if (lambda == 0.0 || !std::isfinite(lambda)) {
        throw ContractViolation("schedule: lambda must be nonzero (the semigroup is undefined at zero coupling)",
                                lambda);
    }
}

double T_of_lambda(const CoarseGrainSchedule& s) {
    s.validate();
    return std::pow(std::abs(s.lambda), -s.xi) * s.T_ref;
}

double coarse_grain_prefactor(double T) {
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(std::numbers::pi, -0.25) * std::sqrt(T);
}

CoarseGrainedPerturbation coarse_grained_L(const EigenSystem& h0, const HermitianOperator& hp, double T,
                                           double omega) {
    if (!(T > 0.0)) throw ContractViolation("coarse_grained_L: T must be positive", T);
    if (hp.dim() != h0.dim()) throw DimensionMismatch("coarse_grained_L: H0 and H' differ in size");
    const double kappa = coarse_grain_prefactor(T);
    const Eigen::MatrixXd delta = h0.bohr_frequencies();
    ComplexMatrix le = h0.to_eigen(hp.matrix());
    for (Index n = 0; n < le.cols(); ++n) {
        for (Index m = 0; m < le.rows(); ++m) {
            const double x = omega - delta(m, n);
            le(m, n) *= kappa * std::exp(-0.5 * T * T * x * x);
        }
    }
    return {omega, T, h0.to_lab(le)};
}

double pv_gaussian(double mu, double a) {
    if (!(a > 0.0)) throw ContractViolation("pv_gaussian: width parameter a must be positive", a);
    return 2.0 * std::sqrt(std::numbers::pi) * gsl_sf_dawson(std::sqrt(a) * mu);
}

namespace {

struct GaussParams {
    double mu;
    double a;
};

double shifted_gaussian(double x, void* p) {
    const auto* g = static_cast<const GaussParams*>(p);
    const double y = x - g->mu;
    return std::exp(-g->a * y * y);
}

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

}  // namespace

double pv_gaussian_quadrature(double mu, double a) {
    if (!(a > 0.0)) throw ContractViolation("pv_gaussian_quadrature: width parameter a must be positive", a);
    // Beyond |ω − μ| = 12/√a the Gaussian is below e^{-144}.
    const double r = std::abs(mu) + 12.0 / std::sqrt(a);
    GaussParams params{mu, a};
    gsl_function f{&shifted_gaussian, &params};
    std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(gsl_integration_workspace_alloc(2000));
    double result = 0.0;
    double abserr = 0.0;
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    const int status = gsl_integration_qawc(&f, -r, r, 0.0, 1e-14, 1e-12, 2000, ws.get(), &result, &abserr);
    gsl_set_error_handler(old);
    if (status != GSL_SUCCESS && status != GSL_EROUND) {
        throw std::runtime_error(std::string("pv_gaussian_quadrature: ") + gsl_strerror(status));
    }
    return result;
}

SecondOrderKernel second_order_kernel(const EigenSystem& h0, const HermitianOperator& hp, double T,
                                      const PhysicalSubsystem& s) {
    if (!(T > 0.0)) throw ContractViolation("second_order_kernel: T must be positive", T);
    const Index d = h0.dim();
    if (hp.dim() != d || s.dim() != d) throw DimensionMismatch("second_order_kernel: dimensions differ");
    const Index n2 = d * d;
    const ComplexMatrix& u = h0.vectors;

    // P₀ in the H₀ eigenbasis, from the rotated Kraus family.
    KrausFamily rotated{d, {}};
    rotated.operators.reserve(s.kraus().operators.size());
    for (const auto& v : s.kraus().operators) rotated.operators.push_back(u.adjoint() * v * u);
    const ComplexMatrix p0e = rotated.heisenberg_superop().matrix();

    const Eigen::MatrixXd delta = h0.bohr_frequencies();
    RealVector dv(n2);
    for (Index n = 0; n < d; ++n)
        for (Index m = 0; m < d; ++m) dv(m + n * d) = delta(m, n);

    // [Z, P₀] is diagonal-weighted in this basis: i P₀_kl (Δ_k − Δ_l).
    double comm = 0.0;
    for (Index l = 0; l < n2; ++l)
        for (Index k = 0; k < n2; ++k) comm = std::max(comm, std::abs(p0e(k, l)) * std::abs(dv(k) - dv(l)));
    const double scale = 1.0 + dv.cwiseAbs().maxCoeff();
    if (comm > kStructuralTol * scale) {
        throw ContractViolation("free dynamics does not commute with P0, ||[Z,P0]|| = " + std::to_string(comm),
                                comm);
    }

    auto p0 = [&](const ComplexMatrix& x) { return devectorize(p0e * vectorize(x), d, d); };

    const double kappa = coarse_grain_prefactor(T);
    const ComplexMatrix hpe = h0.to_eigen(hp.matrix());
    ComplexMatrix l0 = hpe;
    for (Index n = 0; n < d; ++n)
        for (Index m = 0; m < d; ++m) l0(m, n) *= kappa * std::exp(-0.5 * T * T * delta(m, n) * delta(m, n));
    const ComplexMatrix centered = l0 - p0(l0);

    // Only eigenbasis pairs with H'_mn ≠ 0 contribute to L_{λω}.
    const ComplexVector hv = vectorize(hpe);
    std::vector<Index> support;
    for (Index k = 0; k < n2; ++k)
        if (hv(k) != cplx(0.0)) support.push_back(k);
    const auto ns = static_cast<Index>(support.size());

    // ∫ dω/(2πω) f_k(ω) f_l(ω) for the Gaussian profiles f_k of the unit pieces.
    const double pref = kappa * kappa / (2.0 * std::numbers::pi);
    Eigen::MatrixXd w(ns, ns);
    for (Index j = 0; j < ns; ++j) {
        for (Index i = 0; i < ns; ++i) {
            const double dk = dv(support[i]);
            const double dl = dv(support[j]);
            const double gap = dk - dl;
            w(i, j) = pref * std::exp(-0.25 * T * T * gap * gap) * pv_gaussian(0.5 * (dk + dl), T * T);
        }
    }

    // ∫ ⟨L†L⟩ term: (B_k† B_l) = conj(H_mn) H_m'n' δ_mm' E_nn'
    ComplexMatrix s1 = ComplexMatrix::Zero(d, d);
    for (Index j = 0; j < ns; ++j) {
        const Index ml = support[j] % d;
        const Index nl = support[j] / d;
        for (Index i = 0; i < ns; ++i) {
            const Index mk = support[i] % d;
            if (mk != ml) continue;
            const Index nk = support[i] / d;
            s1(nk, nl) += w(i, j) * std::conj(hv(support[i])) * hv(support[j]);
        }
    }

    // ∫ ⟨L⟩†⟨L⟩ term
    ComplexMatrix pc(n2, ns);
    for (Index i = 0; i < ns; ++i) pc.col(i) = p0e.col(support[i]) * hv(support[i]);
    const ComplexMatrix z = pc * w.cast<cplx>();
    ComplexMatrix s2 = ComplexMatrix::Zero(d, d);
    for (Index i = 0; i < ns; ++i) {
        s2.noalias() += devectorize(pc.col(i), d, d).adjoint() * devectorize(z.col(i), d, d);
    }

    ComplexMatrix lamb = s2 - p0(s1);
    lamb = 0.5 * (lamb + lamb.adjoint());
    ComplexMatrix m_lab = h0.to_lab(centered);
    m_lab = 0.5 * (m_lab + m_lab.adjoint());
    ComplexMatrix lamb_lab = h0.to_lab(lamb);
    lamb_lab = 0.5 * (lamb_lab + lamb_lab.adjoint());
    return {std::move(m_lab), std::move(lamb_lab)};
}

HermitianOperator lamb_shift(const EigenSystem& h0, const HermitianOperator& hp, double T,
                             const PhysicalSubsystem& s) {
    return HermitianOperator::symmetrized(second_order_kernel(h0, hp, T, s).lamb);
}

}  // namespace qfp
