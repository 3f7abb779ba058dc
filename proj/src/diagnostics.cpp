#include "tpfem/diagnostics.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace tpfem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Eigen::Vector2d> broadcast_eta(const TriMesh& mesh,
                                           const std::vector<Eigen::Vector2d>& eta)
{
    if (eta.empty())
        return std::vector<Eigen::Vector2d>(mesh.num_triangles(), Eigen::Vector2d::Zero());
    if (eta.size() == 1)
        return std::vector<Eigen::Vector2d>(mesh.num_triangles(), eta[0]);
    if (eta.size() != static_cast<std::size_t>(mesh.num_triangles()))
        throw std::invalid_argument("pencil_check: eta must have 0, 1, or one entry "
                                    "per triangle");
    return eta;
}

// Squared L2(Omega) norm of a scalar function by degree-4 quadrature.
double space_norm_sq(const TriMesh& mesh, const std::function<double(double, double)>& f)
{
    const auto& quad = tri_quadrature(4);
    double sum = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double v = f(pts[q].x(), pts[q].y());
            sum += mesh.tri_areas[k] * quad.weights[q] * v * v;
        }
    }
    return sum;
}

double space_norm_sq_vec(const TriMesh& mesh,
                         const std::function<Eigen::Vector2d(double, double)>& f)
{
    const auto& quad = tri_quadrature(4);
    double sum = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q)
            sum += mesh.tri_areas[k] * quad.weights[q] * f(pts[q].x(), pts[q].y()).squaredNorm();
    }
    return sum;
}

// Squared H1 norm with the gradient taken by central differences; quadrature
// points are interior, so the stencil never leaves the domain at this step.
double h1_norm_sq(const TriMesh& mesh, const ScalarFn& f)
{
    const double step = 1e-5;
    const auto& quad = tri_quadrature(4);
    double sum = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double x = pts[q].x(), y = pts[q].y();
            const double v = f(x, y);
            const double gx = (f(x + step, y) - f(x - step, y)) / (2.0 * step);
            const double gy = (f(x, y + step) - f(x, y - step)) / (2.0 * step);
            sum += mesh.tri_areas[k] * quad.weights[q] * (v * v + gx * gx + gy * gy);
        }
    }
    return sum;
}

double sq(double v) { return v * v; }

// Stress field as a 2x2 matrix at a point: row i is the i-th row flux.
Eigen::Matrix2d stress_at(const TriMesh& mesh, const Eigen::VectorXd& coeffs, int k,
                          const Eigen::Vector2d& x)
{
    const int E = mesh.num_edges();
    Eigen::Matrix2d S;
    S.row(0) = rt0_eval(mesh, coeffs.head(E), k, x).transpose();
    S.row(1) = rt0_eval(mesh, coeffs.tail(E), k, x).transpose();
    return S;
}

} // namespace

StabilityMargins stability_margins(const MaterialParams& params, double gamma, double s)
{
    const DerivedCoeffs d = derived_coeffs(params);
    const SpectralBounds b = spectral_bounds(params);
    StabilityMargins m;
    m.s = s;
    m.gamma = gamma;
    m.gamma_tilde = gamma / (2.0 * b.k_m);
    m.raw_margin = s * (params.a0 + d.a_r - d.b_r) - m.gamma_tilde;
    m.eps1 = params.alpha > 0.0
                 ? (4.0 * params.alpha / (d.c_r * (1.0 + s))) * s
                       * (params.c0 + d.c_r - d.b_r)
                 : kInf;
    m.eps2 = params.beta > 0.0 ? (4.0 * params.beta / (d.a_r * (1.0 + s))) * m.raw_margin
                               : kInf;
    m.eps_positive = m.eps1 > 0.0 && m.eps2 > 0.0;
    return m;
}

PencilReport pencil_check(const TriMesh& mesh, const MaterialParams& params,
                          const std::vector<Eigen::Vector2d>& eta, double s,
                          unsigned seed, int iterations)
{
    const auto field = broadcast_eta(mesh, eta);
    const BlockSystem skeleton = assemble_system(
        mesh, params, Eigen::VectorXd::Zero(mesh.num_edges()), zero_sources(), 0.0);

    double gamma = 0.0;
    SpMat M = s * skeleton.Phi;
    M += psi_with_transport(skeleton, mesh, field, &gamma);

    PencilReport report;
    report.s = s;
    report.dim = skeleton.layout.total;
    report.margins = stability_margins(params, gamma, s);

    Eigen::SparseLU<SpMat> lu(M);
    if (lu.info() != Eigen::Success)
        return report;
    Eigen::SparseLU<SpMat> lu_t(SpMat(M.transpose()));
    if (lu_t.info() != Eigen::Success)
        return report;
    report.factorized = true;

    // Inverse iteration on (M M^T)^{-1}: the iterate converges to the left
    // singular vector of the smallest singular value, and |M^T x| recovers it.
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd x(report.dim);
    for (int i = 0; i < report.dim; ++i)
        x[i] = dist(rng);
    x.normalize();
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd z = lu_t.solve(lu.solve(x));
        const double nz = z.norm();
        if (!std::isfinite(nz) || nz == 0.0) {
            report.factorized = false;
            return report;
        }
        x = z / nz;
    }
    report.sigma_min = (M.transpose() * x).norm();
    return report;
}

EnergyReport energy_report(const RunResult& run, const MaterialParams& params,
                           const Sources& sources, const ScalarFn& p0, const ScalarFn& T0)
{
    if (run.states.size() < 2)
        throw std::invalid_argument("energy_report: run holds fewer than two time levels");
    const TriMesh& mesh = run.mesh;
    const int E = mesh.num_edges();
    const std::size_t N = run.states.size();

    std::vector<double> p2(N), T2(N), w2(N), r2(N), s2(N), u2(N);
    std::vector<double> wdiv2(N), rdiv2(N), sdiv2(N);
    for (std::size_t k = 0; k < N; ++k) {
        const State& st = run.states[k];
        p2[k] = sq(norm_P0(mesh, st.p()));
        T2[k] = sq(norm_P0(mesh, st.T()));
        w2[k] = sq(norm_RT0(mesh, st.w()));
        r2[k] = sq(norm_RT0(mesh, st.r()));
        const Eigen::VectorXd sig = st.sigma();
        s2[k] = sq(norm_RT0(mesh, sig.head(E))) + sq(norm_RT0(mesh, sig.tail(E)));
        sdiv2[k] = sq(norm_RT0_div(mesh, sig.head(E))) + sq(norm_RT0_div(mesh, sig.tail(E)));
        u2[k] = sq(norm_P0(mesh, st.u()));
        wdiv2[k] = sq(norm_RT0_div(mesh, st.w()));
        rdiv2[k] = sq(norm_RT0_div(mesh, st.r()));
    }

    const auto sup = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end());
    };
    const auto trapezoid = [&run, N](const std::vector<double>& v) {
        double sum = 0.0;
        for (std::size_t k = 1; k < N; ++k)
            sum += 0.5 * (run.states[k].t - run.states[k - 1].t) * (v[k] + v[k - 1]);
        return sum;
    };

    // Backward-difference quotients, summed as a rectangle rule over steps.
    double int_dp2 = 0.0, int_dT2 = 0.0, int_ds2 = 0.0, int_du2 = 0.0;
    for (std::size_t k = 1; k < N; ++k) {
        const State& a = run.states[k - 1];
        const State& b = run.states[k];
        const double dt = b.t - a.t;
        int_dp2 += sq(norm_P0(mesh, ((b.p() - a.p()) / dt).eval())) * dt;
        int_dT2 += sq(norm_P0(mesh, ((b.T() - a.T()) / dt).eval())) * dt;
        const Eigen::VectorXd ds = (b.sigma() - a.sigma()) / dt;
        int_ds2 += (sq(norm_RT0(mesh, ds.head(E))) + sq(norm_RT0(mesh, ds.tail(E)))) * dt;
        int_du2 += sq(norm_P0(mesh, ((b.u() - a.u()) / dt).eval())) * dt;
    }

    EnergyReport rep;
    rep.lhs[0] = sup(p2) + sup(T2) + trapezoid(w2) + trapezoid(r2)
                 + stress_compliance_energy(mesh, params, run.states[0].sigma());
    rep.lhs[1] = int_dp2 + int_dT2 + sup(w2) + sup(r2);
    rep.lhs[2] = sup(s2) + int_ds2 + sup(u2) + int_du2;
    std::vector<double> whdiv(N), rhdiv(N), shdiv(N);
    for (std::size_t k = 0; k < N; ++k) {
        whdiv[k] = w2[k] + wdiv2[k];
        rhdiv[k] = r2[k] + rdiv2[k];
        shdiv[k] = s2[k] + sdiv2[k];
    }
    rep.lhs[3] = trapezoid(whdiv) + trapezoid(rhdiv) + trapezoid(shdiv);

    // Data functional shared by all four estimates.
    std::vector<double> f2(N), g2(N), h2(N);
    for (std::size_t k = 0; k < N; ++k) {
        const double t = run.states[k].t;
        f2[k] = space_norm_sq_vec(mesh, [&sources, t](double x, double y) {
            return sources.f(x, y, t);
        });
        g2[k] = space_norm_sq(mesh, [&sources, t](double x, double y) {
            return sources.g(x, y, t);
        });
        h2[k] = space_norm_sq(mesh, [&sources, t](double x, double y) {
            return sources.h(x, y, t);
        });
    }
    double int_df2 = 0.0;
    for (std::size_t k = 1; k < N; ++k) {
        const double ta = run.states[k - 1].t, tb = run.states[k].t;
        const double dt = tb - ta;
        int_df2 += dt * space_norm_sq_vec(mesh, [&sources, ta, tb, dt](double x, double y) {
            return ((sources.f(x, y, tb) - sources.f(x, y, ta)) / dt).eval();
        });
    }
    rep.data = trapezoid(f2) + int_df2 + trapezoid(g2) + trapezoid(h2)
               + h1_norm_sq(mesh, p0) + h1_norm_sq(mesh, T0);
    for (int i = 0; i < 4; ++i)
        rep.ratio[i] = rep.data > 0.0 ? rep.lhs[i] / rep.data : 0.0;
    return rep;
}

ContractionReport contraction_report(const std::vector<PicardLog>& logs,
                                     const MaterialParams& params, double T_f)
{
    const DerivedCoeffs d = derived_coeffs(params);
    const SpectralBounds b = spectral_bounds(params);
    ContractionReport rep;
    rep.xi = d.xi;
    rep.k_m = b.k_m;
    rep.T_f = T_f;

    double sup_w = 0.0, sup_eta = 0.0;
    for (const PicardLog& log : logs) {
        for (double v : log.sup_w)
            sup_w = std::max(sup_w, v);
        for (double v : log.sup_eta)
            sup_eta = std::max(sup_eta, v);
        std::vector<double> rr;
        for (std::size_t m = 1; m < log.err_r.size(); ++m) {
            const double ratio =
                log.err_r[m - 1] > 0.0 ? sq(log.err_r[m] / log.err_r[m - 1]) : 0.0;
            rr.push_back(ratio);
            rep.max_ratio_sq = std::max(rep.max_ratio_sq, ratio);
            if (ratio >= 1.0)
                rep.any_ratio_ge_one = true;
        }
        rep.ratios_sq.push_back(std::move(rr));
    }
    rep.gamma1 = sq(sup_w);
    rep.gamma2 = sq(sup_eta);

    const auto constant = [&rep](double g_exp, double g_lin) {
        return (rep.xi * g_lin / 2.0) * std::exp(rep.xi * g_exp * rep.T_f / rep.k_m);
    };
    rep.C_contr = constant(rep.gamma1, rep.gamma2);
    rep.C_contr_alt = constant(rep.gamma2, rep.gamma1);
    rep.t1 = rep.C_contr > 0.0 ? 1.0 / (2.0 * rep.C_contr) : kInf;
    rep.t1_alt = rep.C_contr_alt > 0.0 ? 1.0 / (2.0 * rep.C_contr_alt) : kInf;
    rep.degenerate = rep.gamma2 == 0.0;
    return rep;
}

NormEquivalenceReport norm_equivalence_check(const MaterialParams& params, int samples,
                                             unsigned seed)
{
    if (samples < 1)
        throw std::invalid_argument("norm_equivalence_check: need at least one sample");
    require_valid(params);

    const TriMesh mesh = build_structured(2);
    const int F = mesh.num_triangles();
    const std::vector<double> areas(mesh.tri_areas.begin(), mesh.tri_areas.end());

    NormEquivalenceReport rep;
    rep.samples = samples;
    rep.lower_bound = 1.0 / (2.0 * (params.mu + params.lambda));
    rep.upper_bound = 1.0 / (2.0 * params.mu);
    rep.worst_lower_margin = kInf;
    rep.worst_upper_margin = kInf;

    const auto ratio_of = [&](const std::vector<Eigen::Matrix2d>& field) {
        double den = 0.0;
        for (int k = 0; k < F; ++k)
            den += areas[k] * field[k].squaredNorm();
        return compliance_inner(field, field, areas, params) / den;
    };

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Eigen::Matrix2d> field(F);
    for (int s = 0; s < samples; ++s) {
        for (int k = 0; k < F; ++k) {
            const double a = dist(rng), c = dist(rng), off = dist(rng);
            field[k] << a, off, off, c;
        }
        const double ratio = ratio_of(field);
        rep.worst_lower_margin = std::min(rep.worst_lower_margin, ratio - rep.lower_bound);
        rep.worst_upper_margin = std::min(rep.worst_upper_margin, rep.upper_bound - ratio);
    }

    rep.identity_ratio =
        ratio_of(std::vector<Eigen::Matrix2d>(F, Eigen::Matrix2d::Identity()));
    Eigen::Matrix2d swap;
    swap << 0.0, 1.0, 1.0, 0.0;
    rep.tracefree_ratio = ratio_of(std::vector<Eigen::Matrix2d>(F, swap));

    rep.pass = rep.worst_lower_margin >= -1e-12 && rep.worst_upper_margin >= -1e-12
               && std::abs(rep.identity_ratio - rep.lower_bound) <= 1e-14
               && std::abs(rep.tracefree_ratio - rep.upper_bound) <= 1e-14;
    return rep;
}

double trace_identity_residual(const TriMesh& mesh, const MaterialParams& params,
                               const State& state, const ScalarFn& div_u_exact)
{
    const int E = mesh.num_edges();
    const double ml = params.mu + params.lambda;
    const auto& quad = tri_quadrature(4);
    const auto sigma = state.sigma();
    const auto p = state.p();
    const auto T = state.T();

    double sum = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        Eigen::Vector2d int_row1 = Eigen::Vector2d::Zero();
        Eigen::Vector2d int_row2 = Eigen::Vector2d::Zero();
        for (int a = 0; a < 3; ++a) {
            const int e = mesh.tri_edges[k][a];
            const Eigen::Vector2d cell = rt0_cell_integral(mesh, k, a);
            int_row1 += sigma[e] * cell;
            int_row2 += sigma[E + e] * cell;
        }
        const double mean_tr = (int_row1.x() + int_row2.y()) / mesh.tri_areas[k];
        const double lhs = mean_tr / (2.0 * ml)
                           + (params.alpha * p[k] + params.beta * T[k]) / ml;
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q)
            sum += mesh.tri_areas[k] * quad.weights[q]
                   * sq(lhs - div_u_exact(pts[q].x(), pts[q].y()));
    }
    return std::sqrt(sum);
}

double dissipation_energy(const TriMesh& mesh, const MaterialParams& params,
                          const State& state)
{
    const DerivedCoeffs d = derived_coeffs(params);
    return (params.c0 - d.b_r) * sq(norm_P0(mesh, state.p()))
           + (params.a0 - d.b_r) * sq(norm_P0(mesh, state.T()));
}

double stress_compliance_energy(const TriMesh& mesh, const MaterialParams& params,
                                const Eigen::VectorXd& sigma_coeffs)
{
    // Entries are quadratic per element; the 3-midpoint rule is exact.
    const auto& quad = tri_quadrature(2);
    double sum = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const Eigen::Matrix2d S = stress_at(mesh, sigma_coeffs, k, pts[q]);
            sum += mesh.tri_areas[k] * quad.weights[q] * compliance_contract(S, S, params);
        }
    }
    return sum;
}

void print_pencil_report(const PencilReport& r, std::ostream& os)
{
    os << "pencil s=" << r.s << " dim=" << r.dim << " "
       << (r.factorized ? "nonsingular" : "SINGULAR");
    if (r.factorized)
        os << " sigma_min=" << r.sigma_min;
    os << "\n  transport bound gamma=" << r.margins.gamma
       << " gamma/(2 k_m)=" << r.margins.gamma_tilde << "\n  weights eps1="
       << r.margins.eps1 << " eps2=" << r.margins.eps2
       << " raw margin s(a0+a_r-b_r)-gamma/(2 k_m)=" << r.margins.raw_margin
       << (r.margins.eps_positive ? " (positive)" : " (NOT positive)") << "\n";
}

void print_energy_report(const EnergyReport& r, std::ostream& os)
{
    static const char* label[4] = {
        "(i)   sup|p|^2+sup|T|^2+int|w|^2+int|r|^2+|sigma(0)|_A^2",
        "(ii)  int|dp|^2+int|dT|^2+sup|w|^2+sup|r|^2",
        "(iii) sup|sigma|^2+int|dsigma|^2+sup|u|^2+int|du|^2",
        "(iv)  int|w|_Hdiv^2+int|r|_Hdiv^2+int|sigma|_Hdiv^2",
    };
    os << "energy data functional = " << r.data << "\n";
    for (int i = 0; i < 4; ++i)
        os << label[i] << " = " << r.lhs[i] << "  ratio " << r.ratio[i] << "\n";
}

void print_contraction_report(const ContractionReport& r, std::ostream& os)
{
    os << "contraction xi=" << r.xi << " k_m=" << r.k_m << " T_f=" << r.T_f
       << "\n  gamma1=(sup|w|)^2=" << r.gamma1 << " gamma2=(sup|Theta^-1 r|)^2="
       << r.gamma2 << (r.degenerate ? " (degenerate: no transport)" : "")
       << "\n  C_contr=" << r.C_contr << " t1=" << r.t1
       << "\n  swapped reading: C_contr=" << r.C_contr_alt << " t1=" << r.t1_alt
       << "\n  max squared iterate ratio=" << r.max_ratio_sq
       << (r.any_ratio_ge_one ? " (some ratio >= 1)" : " (all ratios < 1)") << "\n";
}

void print_norm_equivalence_report(const NormEquivalenceReport& r, std::ostream& os)
{
    os << "compliance ratio bounds [" << r.lower_bound << ", " << r.upper_bound
       << "] over " << r.samples << " samples\n  worst margins: lower "
       << r.worst_lower_margin << ", upper " << r.worst_upper_margin
       << "\n  attainment: identity " << r.identity_ratio << ", trace-free "
       << r.tracefree_ratio << "\n  " << (r.pass ? "PASS" : "FAIL") << "\n";
}

} // namespace tpfem
