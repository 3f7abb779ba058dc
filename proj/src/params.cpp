#include "tpfem/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tpfem {

std::pair<double, double> sym_eigenvalue_bounds(const Eigen::Matrix2d& M)
{
    const double mean = 0.5 * (M(0, 0) + M(1, 1));
    const double diff = 0.5 * (M(0, 0) - M(1, 1));
    const double rad = std::sqrt(diff * diff + M(0, 1) * M(1, 0));
    return {mean - rad, mean + rad};
}

std::vector<std::string> validate(const MaterialParams& p)
{
    std::vector<std::string> errs;
    auto positive = [&errs](double v, const char* name) {
        if (!(v > 0.0))
            errs.push_back(std::string(name) + " must be strictly positive");
    };
    positive(p.a0, "a0");
    positive(p.c0, "c0");
    positive(p.alpha, "alpha");
    positive(p.mu, "mu");
    positive(p.lambda, "lambda");
    if (p.b0 < 0.0)
        errs.push_back("b0 must be nonnegative");
    if (p.beta < 0.0)
        errs.push_back("beta must be nonnegative");
    // b0 and beta vanish together or not at all: the thermal dilation enters
    // the pressure balance only through b0 - alpha*beta/(mu+lambda).
    if ((p.b0 == 0.0) != (p.beta == 0.0))
        errs.push_back("beta and b0 must both be positive or both zero (Biot limit)");

    auto spd = [&errs](const Eigen::Matrix2d& M, const char* name) {
        if (std::abs(M(0, 1) - M(1, 0)) > 1e-14 * (1.0 + M.cwiseAbs().maxCoeff()))
            errs.push_back(std::string(name) + " must be symmetric");
        else if (sym_eigenvalue_bounds(M).first <= 0.0)
            errs.push_back(std::string(name) + " must be positive definite");
    };
    spd(p.K, "K");
    spd(p.Theta, "Theta");
    return errs;
}

void require_valid(const MaterialParams& p)
{
    const auto errs = validate(p);
    if (errs.empty())
        return;
    std::ostringstream msg;
    msg << "invalid material parameters:";
    for (const auto& e : errs)
        msg << "\n  " << e;
    throw std::invalid_argument(msg.str());
}

DerivedCoeffs derived_coeffs(const MaterialParams& p)
{
    DerivedCoeffs d;
    const double ml = p.mu + p.lambda;
    d.c_r = p.alpha * p.alpha / ml;
    d.b_r = p.b0 - p.alpha * p.beta / ml;
    d.a_r = p.beta * p.beta / ml;
    if (p.alpha * p.beta > 0.0)
        d.xi = spectral_bounds(p).theta_M * ml / (p.alpha * p.beta);
    else
        d.xi = std::numeric_limits<double>::infinity();
    return d;
}

SpectralBounds spectral_bounds(const MaterialParams& p)
{
    SpectralBounds b;
    // Eigenvalues of the inverse are the reciprocals of the eigenvalues.
    const auto k = sym_eigenvalue_bounds(p.K);
    const auto t = sym_eigenvalue_bounds(p.Theta);
    b.k_m = 1.0 / k.second;
    b.k_M = 1.0 / k.first;
    b.theta_m = 1.0 / t.second;
    b.theta_M = 1.0 / t.first;
    return b;
}

ConstraintReport check_constraints(const MaterialParams& p)
{
    const auto d = derived_coeffs(p);
    const double ml = p.mu + p.lambda;
    ConstraintReport r;
    r.margin1 = d.b_r;
    r.margin2 = p.c0 - 0.5 * d.c_r - p.b0 - 1.0 / (6.0 * ml);
    r.margin3 = p.a0 - 0.5 * d.a_r - p.b0 - 1.0 / (6.0 * ml);
    r.pass1 = r.margin1 > 0.0;
    r.pass2 = r.margin2 > 0.0;
    r.pass3 = r.margin3 > 0.0;
    r.pass = r.pass1 && r.pass2 && r.pass3;
    return r;
}

Eigen::Matrix2d compliance_apply(const Eigen::Matrix2d& tau, const MaterialParams& p)
{
    const double trace_factor = p.lambda / (2.0 * (p.mu + p.lambda));
    return (tau - trace_factor * tau.trace() * Eigen::Matrix2d::Identity()) / (2.0 * p.mu);
}

double compliance_contract(const Eigen::Matrix2d& tau1, const Eigen::Matrix2d& tau2,
                           const MaterialParams& p)
{
    return compliance_apply(tau1, p).cwiseProduct(tau2).sum();
}

double compliance_inner(const std::vector<Eigen::Matrix2d>& tau1,
                        const std::vector<Eigen::Matrix2d>& tau2,
                        const std::vector<double>& areas,
                        const MaterialParams& p)
{
    if (tau1.size() != areas.size() || tau2.size() != areas.size())
        throw std::invalid_argument("compliance_inner: field/mesh size mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < areas.size(); ++k)
        sum += areas[k] * compliance_contract(tau1[k], tau2[k], p);
    return sum;
}

} // namespace tpfem
