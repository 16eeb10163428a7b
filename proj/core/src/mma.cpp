#include "pneutop/mma.hpp"

#include "pneutop/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pneutop {

void validate(const MmaParams& p)
{
    if (!(p.asyinit > 0.0 && p.asyinit <= 1.0)) throw ConfigError("mma.asyinit must lie in (0, 1]");
    if (!(p.asydecr > 0.0 && p.asydecr < 1.0)) throw ConfigError("mma.asydecr must lie in (0, 1)");
    if (!(p.asyincr > 1.0)) throw ConfigError("mma.asyincr must be > 1");
    if (!(p.albefa > 0.0 && p.albefa < 1.0)) throw ConfigError("mma.albefa must lie in (0, 1)");
    if (!(p.asymin > 0.0 && p.asymin <= p.asyinit)) throw ConfigError("mma.asymin must lie in (0, asyinit]");
    if (!(p.asymax >= p.asyinit)) throw ConfigError("mma.asymax must be >= asyinit");
    if (!(p.move > 0.0 && p.move <= 1.0)) throw ConfigError("mma.move must lie in (0, 1]");
    if (!(p.raa0 > 0.0)) throw ConfigError("mma.raa0 must be positive");
    if (!(p.c > 0.0)) throw ConfigError("mma.c must be positive");
    if (!(p.d >= 0.0)) throw ConfigError("mma.d must be non-negative");
    if (!(p.epsimin > 0.0 && p.epsimin < 1e-3)) throw ConfigError("mma.epsimin must lie in (0, 1e-3)");
}

namespace {

using Eigen::ArrayXd;

struct Subproblem {
    int n, m;
    const ArrayXd& low;
    const ArrayXd& upp;
    const ArrayXd& alfa;
    const ArrayXd& beta;
    const ArrayXd& p0;
    const ArrayXd& q0;
    const Matrix& P;  // m x n
    const Matrix& Q;
    double a0;
    const ArrayXd& a;
    const ArrayXd& b;
    const ArrayXd& c;
    const ArrayXd& d;
};

struct Iterate {
    ArrayXd x, y, lam, xsi, eta, mu, s;
    double z = 1.0, zet = 1.0;
};

// Residual of the barrier-perturbed KKT system.
ArrayXd kkt_residual(const Subproblem& sp, const Iterate& it, double epsi)
{
    const ArrayXd ux1 = sp.upp - it.x;
    const ArrayXd xl1 = it.x - sp.low;
    const ArrayXd plam = sp.p0 + (sp.P.transpose() * it.lam.matrix()).array();
    const ArrayXd qlam = sp.q0 + (sp.Q.transpose() * it.lam.matrix()).array();
    const ArrayXd gvec = (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix()).array();

    const int n = sp.n, m = sp.m;
    ArrayXd r(3 * n + 4 * m + 2);
    r.segment(0, n) = plam / ux1.square() - qlam / xl1.square() - it.xsi + it.eta;
    r.segment(n, m) = sp.c + sp.d * it.y - it.mu - it.lam;
    r[n + m] = sp.a0 - it.zet - (sp.a * it.lam).sum();
    r.segment(n + m + 1, m) = gvec - sp.a * it.z - it.y + it.s - sp.b;
    r.segment(n + 2 * m + 1, n) = it.xsi * (it.x - sp.alfa) - epsi;
    r.segment(2 * n + 2 * m + 1, n) = it.eta * (sp.beta - it.x) - epsi;
    r.segment(3 * n + 2 * m + 1, m) = it.mu * it.y - epsi;
    r[3 * n + 3 * m + 1] = it.zet * it.z - epsi;
    r.segment(3 * n + 3 * m + 2, m) = it.lam * it.s - epsi;
    return r;
}

double max_ratio(const ArrayXd& num, const ArrayXd& den, double factor)
{
    double out = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < num.size(); ++i) out = std::max(out, factor * num[i] / den[i]);
    return out;
}

Iterate solve_subproblem(const Subproblem& sp, double epsimin, MmaStep& stats)
{
    const int n = sp.n, m = sp.m;
    Iterate it;
    it.x = 0.5 * (sp.alfa + sp.beta);
    it.y = ArrayXd::Ones(m);
    it.lam = ArrayXd::Ones(m);
    it.xsi = (it.x - sp.alfa).inverse().max(1.0);
    it.eta = (sp.beta - it.x).inverse().max(1.0);
    it.mu = (0.5 * sp.c).max(1.0);
    it.s = ArrayXd::Ones(m);

    double epsi = 1.0;
    while (epsi > epsimin) {
        ArrayXd res = kkt_residual(sp, it, epsi);
        double resnorm = res.matrix().norm();
        double resmax = res.abs().maxCoeff();
        int ittt = 0;
        while (resmax > 0.9 * epsi && ittt < 200) {
            ++ittt;
            ++stats.newton_iterations;
            const ArrayXd ux1 = sp.upp - it.x, xl1 = it.x - sp.low;
            const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
            const ArrayXd ux3 = ux1 * ux2, xl3 = xl1 * xl2;
            const ArrayXd plam = sp.p0 + (sp.P.transpose() * it.lam.matrix()).array();
            const ArrayXd qlam = sp.q0 + (sp.Q.transpose() * it.lam.matrix()).array();
            const ArrayXd gvec = (sp.P * ux1.inverse().matrix() + sp.Q * xl1.inverse().matrix()).array();
            const Matrix GG = sp.P * ux2.inverse().matrix().asDiagonal() - sp.Q * xl2.inverse().matrix().asDiagonal();

            const ArrayXd dpsidx = plam / ux2 - qlam / xl2;
            const ArrayXd delx = dpsidx - epsi / (it.x - sp.alfa) + epsi / (sp.beta - it.x);
            const ArrayXd dely = sp.c + sp.d * it.y - it.lam - epsi / it.y;
            const double delz = sp.a0 - (sp.a * it.lam).sum() - epsi / it.z;
            const ArrayXd dellam = gvec - sp.a * it.z - it.y - sp.b + epsi / it.lam;
            const ArrayXd diagx = 2.0 * (plam / ux3 + qlam / xl3) + it.xsi / (it.x - sp.alfa) + it.eta / (sp.beta - it.x);
            const ArrayXd diagy = sp.d + it.mu / it.y;
            const ArrayXd diaglamyi = it.s / it.lam + diagy.inverse();

            ArrayXd dx(n), dlam(m);
            double dz = 0.0;
            if (m < n) {
                Matrix AA(m + 1, m + 1);
                AA.topLeftCorner(m, m) = GG * diagx.inverse().matrix().asDiagonal() * GG.transpose();
                AA.topLeftCorner(m, m).diagonal() += diaglamyi.matrix();
                AA.block(0, m, m, 1) = sp.a.matrix();
                AA.block(m, 0, 1, m) = sp.a.matrix().transpose();
                AA(m, m) = -it.zet / it.z;
                Vector bb(m + 1);
                bb.head(m) = (dellam + dely / diagy).matrix() - GG * (delx / diagx).matrix();
                bb[m] = delz;
                const Vector sol = AA.partialPivLu().solve(bb);
                dlam = sol.head(m).array();
                dz = sol[m];
                dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
            } else {
                const ArrayXd dellamyi = dellam + dely / diagy;
                Matrix AA(n + 1, n + 1);
                AA.topLeftCorner(n, n) = GG.transpose() * diaglamyi.inverse().matrix().asDiagonal() * GG;
                AA.topLeftCorner(n, n).diagonal() += diagx.matrix();
                const Vector axz = -(GG.transpose() * (sp.a / diaglamyi).matrix());
                AA.block(0, n, n, 1) = axz;
                AA.block(n, 0, 1, n) = axz.transpose();
                AA(n, n) = it.zet / it.z + (sp.a * sp.a / diaglamyi).sum();
                Vector bb(n + 1);
                bb.head(n) = -(delx.matrix() + GG.transpose() * (dellamyi / diaglamyi).matrix());
                bb[n] = -(delz - (sp.a * dellamyi / diaglamyi).sum());
                const Vector sol = AA.partialPivLu().solve(bb);
                dx = sol.head(n).array();
                dz = sol[n];
                dlam = (GG * dx.matrix()).array() / diaglamyi - dz * (sp.a / diaglamyi) + dellamyi / diaglamyi;
            }

            const ArrayXd dy = -dely / diagy + dlam / diagy;
            const ArrayXd dxsi = -it.xsi + epsi / (it.x - sp.alfa) - it.xsi * dx / (it.x - sp.alfa);
            const ArrayXd deta = -it.eta + epsi / (sp.beta - it.x) + it.eta * dx / (sp.beta - it.x);
            const ArrayXd dmu = -it.mu + epsi / it.y - it.mu * dy / it.y;
            const double dzet = -it.zet + epsi / it.z - it.zet * dz / it.z;
            const ArrayXd ds = -it.s + epsi / it.lam - it.s * dlam / it.lam;

            double stm = std::max(max_ratio(dx, it.x - sp.alfa, -1.01), max_ratio(dx, sp.beta - it.x, 1.01));
            stm = std::max(stm, max_ratio(dy, it.y, -1.01));
            stm = std::max(stm, max_ratio(dlam, it.lam, -1.01));
            stm = std::max(stm, max_ratio(dxsi, it.xsi, -1.01));
            stm = std::max(stm, max_ratio(deta, it.eta, -1.01));
            stm = std::max(stm, max_ratio(dmu, it.mu, -1.01));
            stm = std::max(stm, max_ratio(ds, it.s, -1.01));
            stm = std::max(stm, -1.01 * dz / it.z);
            stm = std::max(stm, -1.01 * dzet / it.zet);
            double steg = 1.0 / std::max(stm, 1.0);

            const Iterate old = it;
            int itto = 0;
            double resinew = 2.0 * resnorm;
            // Written so that a NaN residual counts as an increase.
            while (!(resinew <= resnorm) && itto < 50) {
                ++itto;
                it.x = old.x + steg * dx;
                it.y = old.y + steg * dy;
                it.z = old.z + steg * dz;
                it.lam = old.lam + steg * dlam;
                it.xsi = old.xsi + steg * dxsi;
                it.eta = old.eta + steg * deta;
                it.mu = old.mu + steg * dmu;
                it.zet = old.zet + steg * dzet;
                it.s = old.s + steg * ds;
                res = kkt_residual(sp, it, epsi);
                resinew = res.matrix().norm();
                steg *= 0.5;
            }
            if (!std::isfinite(resinew)) {
                // No finite point along the Newton direction: keep the last
                // iterate and continue with the next barrier level.
                it = old;
                stats.residual_monotone = false;
                break;
            }
            if (resinew > resnorm) stats.residual_monotone = false;
            resnorm = resinew;
            resmax = res.abs().maxCoeff();
        }
        ++stats.barrier_levels;
        epsi *= 0.1;
    }
    stats.kkt_residual = kkt_residual(sp, it, 0.0).abs().maxCoeff();
    return it;
}

} // namespace

MmaOptimizer::MmaOptimizer(int n, int m, Vector xmin, Vector xmax, Vector a, double a0, MmaParams params)
    : n_(n), m_(m), xmin_(std::move(xmin)), xmax_(std::move(xmax)), a_(std::move(a)), a0_(a0), params_(params)
{
    validate(params_);
    if (n_ <= 0 || m_ < 0) throw ShapeError("MMA needs n > 0 variables and m >= 0 constraints");
    if (xmin_.size() != n_ || xmax_.size() != n_ || a_.size() != m_)
        throw ShapeError("MMA bound or weight vector has the wrong length");
    if (!((xmax_ - xmin_).array() > 0.0).all()) throw ConfigError("MMA requires xmin < xmax");
    if (!(a0_ > 0.0)) throw ConfigError("MMA weight a0 must be positive");
}

MmaStep MmaOptimizer::update(const Vector& x, const Vector& df0dx, const Vector& fval, const Matrix& dfdx)
{
    if (x.size() != n_ || df0dx.size() != n_ || fval.size() != m_ || dfdx.rows() != m_ || dfdx.cols() != n_)
        throw ShapeError("MMA update arguments have inconsistent sizes");
    if (!x.allFinite() || !df0dx.allFinite() || !fval.allFinite() || !dfdx.allFinite())
        throw ShapeError("MMA update received non-finite values");
    if ((x.array() < xmin_.array()).any() || (x.array() > xmax_.array()).any())
        throw ShapeError("MMA iterate lies outside its box");

    ++iter_;
    const ArrayXd xa = x.array();
    const ArrayXd range = (xmax_ - xmin_).array();
    const auto& p = params_;

    ArrayXd low(n_), upp(n_);
    if (iter_ <= 2) {
        low = xa - p.asyinit * range;
        upp = xa + p.asyinit * range;
    } else {
        const ArrayXd zzz = (xa - xold1_.array()) * (xold1_.array() - xold2_.array());
        ArrayXd factor = ArrayXd::Ones(n_);
        for (int i = 0; i < n_; ++i) {
            if (zzz[i] > 0.0) factor[i] = p.asyincr;
            else if (zzz[i] < 0.0) factor[i] = p.asydecr;
        }
        low = xa - factor * (xold1_.array() - low_.array());
        upp = xa + factor * (upp_.array() - xold1_.array());
        low = low.max(xa - p.asymax * range).min(xa - p.asymin * range);
        upp = upp.min(xa + p.asymax * range).max(xa + p.asymin * range);
    }

    const ArrayXd alfa = (low + p.albefa * (xa - low)).max(xa - p.move * range).max(xmin_.array());
    const ArrayXd beta = (upp - p.albefa * (upp - xa)).min(xa + p.move * range).min(xmax_.array());

    const ArrayXd ux1 = upp - xa, xl1 = xa - low;
    const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
    const ArrayXd xmamiinv = range.max(1e-5).inverse();

    const ArrayXd dfa = df0dx.array();
    const ArrayXd pq0 = 0.001 * dfa.abs() + p.raa0 * xmamiinv;
    const ArrayXd p0 = (dfa.max(0.0) + pq0) * ux2;
    const ArrayXd q0 = ((-dfa).max(0.0) + pq0) * xl2;

    Matrix P(m_, n_), Q(m_, n_);
    for (int i = 0; i < m_; ++i) {
        const ArrayXd row = dfdx.row(i).transpose().array();
        const ArrayXd pq = 0.001 * row.abs() + p.raa0 * xmamiinv;
        P.row(i) = ((row.max(0.0) + pq) * ux2).matrix().transpose();
        Q.row(i) = (((-row).max(0.0) + pq) * xl2).matrix().transpose();
    }
    const ArrayXd b = (P * ux1.inverse().matrix() + Q * xl1.inverse().matrix()).array() - fval.array();

    const ArrayXd a = a_.array();
    const ArrayXd c = ArrayXd::Constant(m_, p.c);
    const ArrayXd d = ArrayXd::Constant(m_, p.d);
    const Subproblem sp{n_, m_, low, upp, alfa, beta, p0, q0, P, Q, a0_, a, b, c, d};

    MmaStep step;
    Iterate it = solve_subproblem(sp, p.epsimin, step);

    // The barrier keeps the interior point x about epsimin / curvature away
    // from the subproblem minimizer, which is large where the approximation
    // is nearly flat. Given the multipliers, the separable minimizer over
    // [alfa, beta] has a closed form, so take x from there. Clamping guards
    // the box and move limit against rounding.
    const ArrayXd plam = p0 + (P.transpose() * it.lam.matrix()).array();
    const ArrayXd qlam = q0 + (Q.transpose() * it.lam.matrix()).array();
    const ArrayXd sp_root = plam.sqrt(), sq_root = qlam.sqrt();
    step.x = ((sp_root * low + sq_root * upp) / (sp_root + sq_root)).matrix();
    for (int i = 0; i < n_; ++i) {
        double v = std::clamp(step.x[i], alfa[i], beta[i]);
        v = std::clamp(v, xmin_[i], xmax_[i]);
        const double lim = p.move * range[i];
        while (v - x[i] > lim) v = std::nextafter(v, -std::numeric_limits<double>::infinity());
        while (x[i] - v > lim) v = std::nextafter(v, std::numeric_limits<double>::infinity());
        step.x[i] = v;
    }
    step.y = it.y.matrix();
    step.z = it.z;
    step.lambda = it.lam.matrix();
    step.relaxed = m_ > 0 && it.y.maxCoeff() > 1e-6;

    xold2_ = iter_ >= 2 ? xold1_ : x;
    xold1_ = x;
    low_ = low.matrix();
    upp_ = upp.matrix();
    return step;
}

MinMaxMma::MinMaxMma(int n, int num_objectives, int num_constraints, Vector xmin, Vector xmax, MmaParams params)
    : num_objectives_(num_objectives),
      num_constraints_(num_constraints),
      range_(xmax - xmin),
      mma_(n, num_objectives + num_constraints, std::move(xmin), std::move(xmax),
           [&] {
               Vector a = Vector::Zero(num_objectives + num_constraints);
               a.head(num_objectives).setOnes();
               return a;
           }(),
           1.0, params)
{
    if (num_objectives < 1) throw ShapeError("min-max needs at least one objective");
}

MmaStep MinMaxMma::update(const Vector& x, const std::vector<double>& f, const std::vector<Vector>& df,
                          const std::vector<double>& g, const std::vector<Vector>& dg)
{
    if (static_cast<int>(f.size()) != num_objectives_ || static_cast<int>(df.size()) != num_objectives_ ||
        static_cast<int>(g.size()) != num_constraints_ || static_cast<int>(dg.size()) != num_constraints_)
        throw ShapeError("min-max update received the wrong number of rows");

    const int n = mma_.num_variables();
    const int m = num_objectives_ + num_constraints_;
    const double move = mma_.params().move;

    // Convex MMA rows lie above their tangent planes, so f - move * sum|df|
    // bounds each approximated objective from below over the move box.
    double fmin = std::numeric_limits<double>::infinity();
    double slope = 0.0;
    for (int k = 0; k < num_objectives_; ++k) {
        fmin = std::min(fmin, f[static_cast<std::size_t>(k)]);
        slope = std::max(slope, df[static_cast<std::size_t>(k)].cwiseAbs().dot(range_));
    }
    shift_ = std::max(0.0, -fmin) + 1.01 * move * slope + 1.0;

    Vector fval(m);
    Matrix dfdx(m, n);
    for (int k = 0; k < num_objectives_; ++k) {
        fval[k] = f[static_cast<std::size_t>(k)] + shift_;
        dfdx.row(k) = df[static_cast<std::size_t>(k)].transpose();
    }
    for (int j = 0; j < num_constraints_; ++j) {
        fval[num_objectives_ + j] = g[static_cast<std::size_t>(j)];
        dfdx.row(num_objectives_ + j) = dg[static_cast<std::size_t>(j)].transpose();
    }
    MmaStep step = mma_.update(x, Vector::Zero(n), fval, dfdx);
    // Objective rows carry a_k = 1, so y there only measures how far z is from
    // the worst objective; relaxation is a constraint-row property.
    step.relaxed = num_constraints_ > 0 && step.y.tail(num_constraints_).maxCoeff() > 1e-6;
    return step;
}

} // namespace pneutop
