#include "tpfem/verification.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tpfem {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sq(double v) { return v * v; }

Eigen::Matrix2d stress_at(const TriMesh& mesh, const Eigen::VectorXd& coeffs, int k,
                          const Eigen::Vector2d& x)
{
    const int E = mesh.num_edges();
    Eigen::Matrix2d S;
    S.row(0) = rt0_eval(mesh, coeffs.head(E), k, x).transpose();
    S.row(1) = rt0_eval(mesh, coeffs.tail(E), k, x).transpose();
    return S;
}

double rate_between(double coarse, double fine)
{
    if (!(coarse > 0.0) || !(fine > 0.0))
        return kNaN;
    return std::log2(coarse / fine);
}

} // namespace

ManufacturedCase manufactured_case(const MaterialParams& params)
{
    const double mu = params.mu, lambda = params.lambda;
    const double alpha = params.alpha, beta = params.beta;
    const double a0 = params.a0, b0 = params.b0, c0 = params.c0;
    const Eigen::Matrix2d K = params.K, Th = params.Theta;

    const auto s = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
    const auto sx = [](double x, double y) {
        return kPi * std::cos(kPi * x) * std::sin(kPi * y);
    };
    const auto sy = [](double x, double y) {
        return kPi * std::sin(kPi * x) * std::cos(kPi * y);
    };
    const auto sxx = [s](double x, double y) { return -kPi * kPi * s(x, y); };
    const auto sxy = [](double x, double y) {
        return kPi * kPi * std::cos(kPi * x) * std::cos(kPi * y);
    };
    const auto syy = sxx;

    ManufacturedCase mc;
    mc.params = params;
    mc.T = [s](double x, double y, double t) { return t * s(x, y); };
    mc.p = mc.T;
    mc.u = [s](double x, double y, double t) {
        return Eigen::Vector2d(t * s(x, y), t * s(x, y));
    };
    mc.div_u = [sx, sy](double x, double y, double t) { return t * (sx(x, y) + sy(x, y)); };
    mc.w = [K, sx, sy](double x, double y, double t) {
        return (-t * K * Eigen::Vector2d(sx(x, y), sy(x, y))).eval();
    };
    mc.r = [Th, sx, sy](double x, double y, double t) {
        return (-t * Th * Eigen::Vector2d(sx(x, y), sy(x, y))).eval();
    };
    mc.sigma = [mu, lambda, alpha, beta, s, sx, sy](double x, double y, double t) {
        const double div = sx(x, y) + sy(x, y);
        const double iso = lambda * div - (alpha + beta) * s(x, y);
        Eigen::Matrix2d S;
        S << 2.0 * mu * sx(x, y) + iso, mu * div, mu * div, 2.0 * mu * sy(x, y) + iso;
        return (t * S).eval();
    };
    mc.rho = [sx, sy](double x, double y, double t) {
        return 0.5 * t * (sy(x, y) - sx(x, y));
    };

    // Mass balance: d/dt(c0 p - b0 T + alpha div u) + div w = g.
    mc.sources.g = [c0, b0, alpha, K, s, sx, sy, sxx, sxy, syy](double x, double y,
                                                               double t) {
        const double div_w = -(K(0, 0) * sxx(x, y) + (K(0, 1) + K(1, 0)) * sxy(x, y)
                               + K(1, 1) * syy(x, y));
        return (c0 - b0) * s(x, y) + alpha * (sx(x, y) + sy(x, y)) + t * div_w;
    };
    // Energy balance: d/dt(a0 T - b0 p + beta div u) - grad T . (K grad p)
    // + div r = h.
    mc.sources.h = [a0, b0, beta, K, Th, s, sx, sy, sxx, sxy, syy](double x, double y,
                                                                  double t) {
        const Eigen::Vector2d grad(sx(x, y), sy(x, y));
        const double div_r = -(Th(0, 0) * sxx(x, y) + (Th(0, 1) + Th(1, 0)) * sxy(x, y)
                               + Th(1, 1) * syy(x, y));
        return (a0 - b0) * s(x, y) + beta * (sx(x, y) + sy(x, y))
               - t * t * grad.dot(K * grad) + t * div_r;
    };
    // Momentum balance: -div sigma = f.
    const auto body = [mu, lambda, alpha, beta, sx, sy, sxx, sxy, syy](double x, double y) {
        const double lap = sxx(x, y) + syy(x, y);
        return Eigen::Vector2d(
            -(lambda + mu) * (sxx(x, y) + sxy(x, y)) - mu * lap + (alpha + beta) * sx(x, y),
            -(lambda + mu) * (sxy(x, y) + syy(x, y)) - mu * lap + (alpha + beta) * sy(x, y));
    };
    mc.sources.f = [body](double x, double y, double t) { return (t * body(x, y)).eval(); };
    mc.f_t = [body](double x, double y, double) { return body(x, y); };
    return mc;
}

ManufacturedCase default_case()
{
    MaterialParams params; // scalar preset satisfies the admissibility bounds
    params.K << 2.0, 0.5, 0.5, 1.0;
    params.Theta << 1.5, 0.2, 0.2, 1.0;
    return manufactured_case(params);
}

State project_exact(const TriMesh& mesh, const ManufacturedCase& mc, double t)
{
    State st(build_layout(mesh), t);
    st.T() = project_P0(mesh, [&mc, t](double x, double y) { return mc.T(x, y, t); });
    st.p() = project_P0(mesh, [&mc, t](double x, double y) { return mc.p(x, y, t); });
    st.rho() = project_P0(mesh, [&mc, t](double x, double y) { return mc.rho(x, y, t); });
    const Eigen::VectorXd ux =
        project_P0(mesh, [&mc, t](double x, double y) { return mc.u(x, y, t).x(); });
    const Eigen::VectorXd uy =
        project_P0(mesh, [&mc, t](double x, double y) { return mc.u(x, y, t).y(); });
    auto u = st.u();
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        u[2 * k] = ux[k];
        u[2 * k + 1] = uy[k];
    }
    st.w() = interpolate_Hdiv(mesh, [&mc, t](double x, double y) { return mc.w(x, y, t); });
    st.r() = interpolate_Hdiv(mesh, [&mc, t](double x, double y) { return mc.r(x, y, t); });
    const int E = mesh.num_edges();
    auto sigma = st.sigma();
    sigma.head(E) = interpolate_Hdiv(mesh, [&mc, t](double x, double y) {
        const Eigen::Matrix2d S = mc.sigma(x, y, t);
        return Eigen::Vector2d(S(0, 0), S(0, 1));
    });
    sigma.tail(E) = interpolate_Hdiv(mesh, [&mc, t](double x, double y) {
        const Eigen::Matrix2d S = mc.sigma(x, y, t);
        return Eigen::Vector2d(S(1, 0), S(1, 1));
    });
    return st;
}

FieldErrors measure_errors(const TriMesh& mesh, const MaterialParams& params,
                           const State& state, const ManufacturedCase& mc)
{
    const double t = state.t;
    const auto& quad = tri_quadrature(4);
    const auto T = state.T();
    const auto p = state.p();
    const auto u = state.u();
    const Eigen::VectorXd w = state.w();
    const Eigen::VectorXd r = state.r();
    const Eigen::VectorXd sigma = state.sigma();

    double eT2 = 0.0, ep2 = 0.0, eu2 = 0.0, ew2 = 0.0, er2 = 0.0, es2 = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto pts = quadrature_points(mesh, k, quad);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double wt = mesh.tri_areas[k] * quad.weights[q];
            const double x = pts[q].x(), y = pts[q].y();
            eT2 += wt * sq(T[k] - mc.T(x, y, t));
            ep2 += wt * sq(p[k] - mc.p(x, y, t));
            eu2 += wt * (Eigen::Vector2d(u[2 * k], u[2 * k + 1]) - mc.u(x, y, t))
                            .squaredNorm();
            ew2 += wt * (rt0_eval(mesh, w, k, pts[q]) - mc.w(x, y, t)).squaredNorm();
            er2 += wt * (rt0_eval(mesh, r, k, pts[q]) - mc.r(x, y, t)).squaredNorm();
            es2 += wt * (stress_at(mesh, sigma, k, pts[q]) - mc.sigma(x, y, t))
                            .squaredNorm();
        }
    }
    FieldErrors e;
    e.eT = std::sqrt(eT2);
    e.ep = std::sqrt(ep2);
    e.eu = std::sqrt(eu2);
    e.ew = std::sqrt(ew2);
    e.er = std::sqrt(er2);
    e.esigma = std::sqrt(es2);
    e.etr = trace_identity_residual(mesh, params, state, [&mc, t](double x, double y) {
        return mc.div_u(x, y, t);
    });
    return e;
}

ErrorTable convergence_study(const ManufacturedCase& mc, const std::vector<int>& levels,
                             double T_f, double dt_over_h, double tol, int max_iters)
{
    ErrorTable table;
    for (int n : levels) {
        SimSetup setup;
        setup.n = n;
        setup.T_f = T_f;
        setup.dt = dt_over_h / n;
        setup.params = mc.params;
        setup.sources = mc.sources;
        setup.p0 = [&mc](double x, double y) { return mc.p(x, y, 0.0); };
        setup.T0 = [&mc](double x, double y) { return mc.T(x, y, 0.0); };
        setup.u0 = [&mc](double x, double y) { return mc.u(x, y, 0.0); };
        setup.tol = tol;
        setup.max_iters = max_iters;

        RunResult run;
        try {
            run = run_simulation(setup);
        } catch (const PicardDivergence&) {
            return table; // partial table, complete stays false
        }

        table.levels.push_back(n);
        table.h.push_back(1.0 / n);
        table.dt.push_back(setup.dt);
        table.errors.push_back(measure_errors(run.mesh, mc.params, run.states.back(), mc));

        // Secondary space-time L2(L2) errors of the cell-average fields.
        std::vector<double> eT2(run.states.size()), ep2(run.states.size());
        for (std::size_t i = 0; i < run.states.size(); ++i) {
            const FieldErrors fe = measure_errors(run.mesh, mc.params, run.states[i], mc);
            eT2[i] = sq(fe.eT);
            ep2[i] = sq(fe.ep);
        }
        double st_T = 0.0, st_p = 0.0;
        for (std::size_t i = 1; i < run.states.size(); ++i) {
            const double dt = run.states[i].t - run.states[i - 1].t;
            st_T += 0.5 * dt * (eT2[i] + eT2[i - 1]);
            st_p += 0.5 * dt * (ep2[i] + ep2[i - 1]);
        }
        table.st_eT.push_back(std::sqrt(st_T));
        table.st_ep.push_back(std::sqrt(st_p));

        FieldErrors rate{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
        if (table.errors.size() > 1) {
            const FieldErrors& a = table.errors[table.errors.size() - 2];
            const FieldErrors& b = table.errors.back();
            rate.eT = rate_between(a.eT, b.eT);
            rate.ep = rate_between(a.ep, b.ep);
            rate.eu = rate_between(a.eu, b.eu);
            rate.ew = rate_between(a.ew, b.ew);
            rate.er = rate_between(a.er, b.er);
            rate.esigma = rate_between(a.esigma, b.esigma);
            rate.etr = rate_between(a.etr, b.etr);
        }
        table.rates.push_back(rate);
    }
    table.complete = true;
    return table;
}

void write_error_table_csv(const ErrorTable& table, std::ostream& os)
{
    const auto old_precision = os.precision(12);
    os << "level,h,dt,eT,ep,eu,ew,er,esigma,etr,"
          "rate_T,rate_p,rate_u,rate_w,rate_r,rate_sigma,rate_tr\n";
    for (std::size_t i = 0; i < table.levels.size(); ++i) {
        const FieldErrors& e = table.errors[i];
        const FieldErrors& r = table.rates[i];
        os << table.levels[i] << ',' << table.h[i] << ',' << table.dt[i] << ',' << e.eT
           << ',' << e.ep << ',' << e.eu << ',' << e.ew << ',' << e.er << ','
           << e.esigma << ',' << e.etr << ',' << r.eT << ',' << r.ep << ',' << r.eu
           << ',' << r.ew << ',' << r.er << ',' << r.esigma << ',' << r.etr << "\n";
    }
    os.precision(old_precision);
}

void print_error_table(const ErrorTable& table, std::ostream& os)
{
    os << "level      h     dt        eT        ep     esigma       etr   rate_T "
          "rate_p rate_tr\n";
    for (std::size_t i = 0; i < table.levels.size(); ++i) {
        const FieldErrors& e = table.errors[i];
        const FieldErrors& r = table.rates[i];
        os << std::setw(5) << table.levels[i] << std::fixed << std::setprecision(4)
           << std::setw(7) << table.h[i] << std::setw(7) << table.dt[i]
           << std::scientific << std::setprecision(3) << std::setw(10) << e.eT
           << std::setw(10) << e.ep << std::setw(11) << e.esigma << std::setw(10)
           << e.etr << std::fixed << std::setprecision(2) << std::setw(9) << r.eT
           << std::setw(7) << r.ep << std::setw(8) << r.etr << "\n";
    }
    os.unsetf(std::ios::floatfield);
    os << std::setprecision(6);
    for (std::size_t i = 0; i < table.levels.size(); ++i)
        os << "space-time L2(L2) errors at level " << table.levels[i]
           << ": T " << table.st_eT[i] << ", p " << table.st_ep[i] << "\n";
    if (!table.complete)
        os << "study INCOMPLETE: a level failed to converge\n";
}

double biot_recovery_test(const SimSetup& setup)
{
    if (setup.params.beta != 0.0 || setup.params.b0 != 0.0)
        throw std::invalid_argument("biot_recovery_test: requires beta = b0 = 0");

    RunResult full = run_simulation(setup);
    const TriMesh& mesh = full.mesh;
    const SpaceLayout l = build_layout(mesh);
    const int E = mesh.num_edges();
    const int F = mesh.num_triangles();

    // Kept rows in original order: p, w, sigma, u, rho.
    std::vector<int> keep;
    keep.reserve(4 * F + 3 * E);
    const auto push_range = [&keep](int off, int count) {
        for (int i = 0; i < count; ++i)
            keep.push_back(off + i);
    };
    push_range(l.off_p, l.n_p);
    push_range(l.off_w, l.n_w);
    push_range(l.off_sigma, l.n_sigma);
    push_range(l.off_u, l.n_u);
    push_range(l.off_rho, l.n_rho);
    const int R = static_cast<int>(keep.size());
    std::vector<int> pos(l.total, -1);
    for (int i = 0; i < R; ++i)
        pos[keep[i]] = i;

    const BlockSystem sys = assemble_system(
        mesh, setup.params, Eigen::VectorXd::Zero(E), setup.sources, 0.0);
    const auto restrict_mat = [&pos, R](const SpMat& M) {
        std::vector<Eigen::Triplet<double>> t;
        for (int col = 0; col < M.outerSize(); ++col)
            for (SpMat::InnerIterator it(M, col); it; ++it)
                if (pos[it.row()] >= 0 && pos[it.col()] >= 0)
                    t.emplace_back(pos[it.row()], pos[it.col()], it.value());
        SpMat out(R, R);
        out.setFromTriplets(t.begin(), t.end());
        return out;
    };
    const SpMat phi = restrict_mat(sys.Phi);
    const SpMat psi = restrict_mat(sys.Psi);
    const auto restrict_vec = [&keep, R](const Eigen::VectorXd& v) {
        Eigen::VectorXd out(R);
        for (int i = 0; i < R; ++i)
            out[i] = v[keep[i]];
        return out;
    };

    // Reduced-vector offsets mirror the keep order.
    const int off_p = 0, off_w = F, off_sigma = F + E, off_u = F + 3 * E;
    const auto discrepancy = [&](const State& ref, const Eigen::VectorXd& X) {
        double d = std::max(
            norm_P0(mesh, (ref.p() - X.segment(off_p, F)).eval()),
            norm_RT0(mesh, (ref.w() - X.segment(off_w, E)).eval()));
        const Eigen::VectorXd ds = ref.sigma() - X.segment(off_sigma, 2 * E);
        d = std::max(d, norm_RT0(mesh, ds.head(E).eval()));
        d = std::max(d, norm_RT0(mesh, ds.tail(E).eval()));
        return std::max(d, norm_P0(mesh, (ref.u() - X.segment(off_u, 2 * F)).eval()));
    };

    Eigen::VectorXd X = restrict_vec(full.states[0].X);
    double worst = discrepancy(full.states[0], X);
    StepSolver solver;
    for (std::size_t i = 1; i < full.states.size(); ++i) {
        const double dt = full.states[i].t - full.states[i - 1].t;
        SpMat M = (1.0 / dt) * phi;
        M += psi;
        const Eigen::VectorXd L =
            assemble_load(mesh, l, setup.sources, full.states[i].t);
        solver.factorize(M);
        X = solver.solve(restrict_vec(L) + (1.0 / dt) * (phi * X));
        worst = std::max(worst, discrepancy(full.states[i], X));
    }
    return worst;
}

} // namespace tpfem
