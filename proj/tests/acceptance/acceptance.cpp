// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. The desk-scale criteria share two full optimization runs.

#include "mma_examples.hpp"
#include "pneutop/baseline.hpp"
#include "pneutop/config.hpp"
#include "pneutop/darcy_pressure.hpp"
#include "pneutop/export.hpp"
#include "pneutop/parallel.hpp"
#include "pneutop/robust_driver.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pneutop;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o)
{
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failures;
}

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// 1. Adjoint gradients of f_b, f_e and g2 against central differences of the
// same pipeline, on raw design variables.
Outcome adjoint_vs_fd()
{
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::string where;
    for (int n : {4, 8}) {
        for (double beta : {2.0, 8.0}) {
            RobustProblem problem(testing::square_config(n));
            const Vector x = testing::random_field(problem.num_variables(), 1000 + n, 0.05, 0.95);
            const auto ev = problem.evaluate(x, beta);
            const double h = 1e-6;
            Vector fd_b(x.size()), fd_e(x.size()), fd_g2(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                Vector xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const auto p = problem.evaluate(xp, beta, ev.se_star, false);
                const auto m = problem.evaluate(xm, beta, ev.se_star, false);
                fd_b[i] = (p.f_b - m.f_b) / (2 * h);
                fd_e[i] = (p.f_e - m.f_e) / (2 * h);
                fd_g2[i] = (p.g2 - m.g2) / (2 * h);
            }
            const std::pair<const Vector*, const Vector*> pairs[] = {
                {&ev.blueprint.df_drho, &fd_b}, {&ev.eroded.df_drho, &fd_e}, {&ev.eroded.dg2_drho, &fd_g2}};
            const char* names[] = {"f_b", "f_e", "g2"};
            for (int q = 0; q < 3; ++q) {
                const Vector& a = *pairs[q].first;
                const Vector& fd = *pairs[q].second;
                const double scale = fd.cwiseAbs().maxCoeff();
                for (Eigen::Index i = 0; i < fd.size(); ++i) {
                    const double err = relative_error(a[i], fd[i], scale);
                    if (err > worst) {
                        worst = err;
                        where = std::to_string(n) + "x" + std::to_string(n) + " beta " + fmt("%g", beta) + " " +
                                names[q];
                    }
                }
            }
        }
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-3 && elapsed < 30.0,
            "max rel err " + fmt("%.3e", worst) + " (" + where + "), limit 1e-3; runtime " + fmt("%.2f", elapsed) +
                " s, limit 30 s"};
}

// 2. Dropping the load term changes at least one gradient entry by > 10 %.
Outcome load_term_ablation()
{
    OptConfig full = testing::square_config(4);
    OptConfig ablated = full;
    ablated.optimization.load_sensitivity = false;
    RobustProblem pf(full), pa(ablated);
    const Vector x = testing::random_field(pf.num_variables(), 1004, 0.05, 0.95);
    const Vector gf = pf.evaluate(x, 2.0).blueprint.df_drho;
    const Vector ga = pa.evaluate(x, 2.0).blueprint.df_drho;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < gf.size(); ++i)
        worst = std::max(worst, std::abs(ga[i] - gf[i]) / std::max(std::abs(gf[i]), 1e-300));
    return {worst > 0.1, "largest deviation " + fmt("%.1f", 100.0 * worst) + " %, required > 10 %"};
}

// 3. Solid column decays to r p_in at delta_s; void strip is linear.
Outcome darcy_calibration()
{
    std::string detail;
    bool pass = true;
    for (int per : {8, 16}) {
        const DomainModel d = build_domain(testing::column_domain(4 * per));
        FlowParams flow;
        flow.delta_s = per;
        PressureSolver solver(d, flow);
        const Vector rho = Vector::Ones(d.num_elements());
        const Vector& p = solver.solve(flow_coefficient(rho, flow).value, drainage_coefficient(rho, flow).value);
        const double ratio = p[d.node_index(0, per)] / flow.p_in;
        pass = pass && std::abs(ratio - 0.1) <= 0.02 * 0.1;
        detail += "p(ds)/p_in " + fmt("%.5f", ratio) + " at " + std::to_string(per) + " el/ds; ";
    }
    const int n = 40;
    const DomainModel d = build_domain(testing::column_domain(n));
    FlowParams flow;
    flow.delta_s = 8.0;
    PressureSolver solver(d, flow);
    const Vector rho = Vector::Zero(d.num_elements());
    const Vector& p = solver.solve(flow_coefficient(rho, flow).value, drainage_coefficient(rho, flow).value);
    double dev = 0.0;
    for (int iy = 0; iy <= n; ++iy)
        for (int ix = 0; ix <= 2; ++ix)
            dev = std::max(dev, std::abs(p[d.node_index(ix, iy)] - flow.p_in * (1.0 - double(iy) / n)));
    pass = pass && dev <= 1e-8 * flow.p_in;
    detail += "void strip max deviation " + fmt("%.2e", dev / flow.p_in) + " p_in (limits 0.1 +- 2 %, 1e-8)";
    return {pass, detail};
}

// 4. Pressure stays within the boundary values for random fields.
Outcome pressure_bounds()
{
    const DomainModel d = build_domain(testing::square_domain(16));
    FlowParams flow;
    flow.delta_s = 2.0;
    PressureSolver solver(d, flow);
    double lo = 0.0, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Vector rho = testing::random_field(d.num_elements(), 5000 + seed);
        const Vector& p = solver.solve(flow_coefficient(rho, flow).value, drainage_coefficient(rho, flow).value);
        lo = std::min(lo, p.minCoeff() / flow.p_in);
        hi = std::max(hi, p.maxCoeff() / flow.p_in);
    }
    return {lo >= -1e-8 && hi <= 1.0 + 1e-8,
            "100 fields, p/p_in in [" + fmt("%.3e", lo) + ", 1 + " + fmt("%.3e", hi - 1.0) + "], limits 1e-8"};
}

struct DeskRun {
    OptimizationResult result;
    double seconds = 0.0;
    double max_erosion_gap = -1.0;
    std::map<int, Vector> x_at_doubling;  // design evaluated at each beta doubling row
};

DeskRun desk_run(const OptConfig& config, int threads)
{
    set_num_threads(threads);
    RobustProblem schedule(config);
    DeskRun run_info;
    const auto t0 = Clock::now();
    run_info.result = run(config, [&](const IterationRecord& rec, const RobustEvaluation& ev, const Vector& x) {
        run_info.max_erosion_gap =
            std::max(run_info.max_erosion_gap, (ev.field.eroded.value - ev.field.blueprint.value).maxCoeff());
        if (rec.iter > 1 && schedule.beta_at(rec.iter) != schedule.beta_at(rec.iter - 1))
            run_info.x_at_doubling[rec.iter] = x;
    });
    run_info.seconds = seconds_since(t0);
    set_num_threads(1);
    return run_info;
}

// 5. Desk run: budget, final constraints, grayness, jumps at beta doublings.
Outcome desk_behaviour(const OptConfig& config, const DeskRun& desk)
{
    const auto& r = desk.result;
    if (!r.completed) return {false, "run stopped: " + r.error};
    const auto& last = r.history.back();
    const int iterations = static_cast<int>(r.history.size()) - 1;
    bool pass = iterations == config.optimization.max_iter && desk.seconds <= 15 * 60;
    pass = pass && std::abs(last.g1 - 1.0) <= 0.01 && last.g2 <= 1.0 + 1e-3 && last.grayness <= 0.05;

    // Beta may only change on the doubling rows, and each doubling row must
    // stand out of the history: its |delta f_unit| exceeds twice the median of
    // the ten preceding row-to-row changes.
    RobustProblem problem(config);
    std::vector<int> expected;
    for (int it = 2; it <= static_cast<int>(r.history.size()); ++it)
        if (problem.beta_at(it) != problem.beta_at(it - 1)) expected.push_back(it);
    std::vector<int> changed;
    for (std::size_t k = 1; k < r.history.size(); ++k)
        if (r.history[k].beta != r.history[k - 1].beta) changed.push_back(r.history[k].iter);
    pass = pass && changed == expected;
    auto step = [&](int iter) {
        const auto i = static_cast<std::size_t>(iter - 1);
        return std::abs(r.history[i].f_unit - r.history[i - 1].f_unit);
    };
    double weakest_ratio = std::numeric_limits<double>::infinity();
    for (int iter : expected) {
        std::vector<double> before;
        for (int j = iter - 10; j < iter; ++j)
            if (j >= 2) before.push_back(step(j));
        std::nth_element(before.begin(), before.begin() + before.size() / 2, before.end());
        double median = before[before.size() / 2];
        if (before.size() % 2 == 0) {
            const double lower = *std::max_element(before.begin(), before.begin() + before.size() / 2);
            median = 0.5 * (median + lower);
        }
        weakest_ratio = std::min(weakest_ratio, step(iter) / std::max(median, 1e-300));
    }
    pass = pass && weakest_ratio > 2.0;

    // Diagnostic: the jump caused by beta alone, same design at both values.
    double smallest_jump = std::numeric_limits<double>::infinity();
    for (const auto& [iter, x] : desk.x_at_doubling) {
        const double f_new = problem.evaluate(x, problem.beta_at(iter), r.se_star, false).f_unit();
        const double f_old = problem.evaluate(x, problem.beta_at(iter - 1), r.se_star, false).f_unit();
        smallest_jump = std::min(smallest_jump, std::abs(f_new - f_old) / std::max(std::abs(f_old), 1e-300));
    }

    std::ostringstream os;
    os << iterations << " iterations in " << fmt("%.1f", desk.seconds) << " s (limit 900); g1 " << fmt("%.5f", last.g1)
       << " (|g1-1| <= 0.01); g2 " << fmt("%.5f", last.g2) << " (<= 1.001); grayness " << fmt("%.4f", last.grayness)
       << " (<= 0.05); beta changes at";
    for (int it : changed) os << ' ' << it;
    os << "; weakest doubling-row jump " << fmt("%.2f", weakest_ratio)
       << "x the median of the 10 preceding steps (> 2); smallest jump from beta alone " << fmt("%.2e", smallest_jump)
       << " (relative)";
    return {pass, os.str()};
}

// 6. Optimized design beats the rectangular chamber in the linear analyzer.
Outcome beats_baseline(const OptConfig& config, const DeskRun& desk)
{
    if (!desk.result.completed) return {false, "desk run did not complete"};
    const DomainModel domain = build_domain(config.domain);
    const Analysis base = analyze(config, baseline_rectangular(domain, config.baseline));
    const Analysis opt = analyze(config, desk.result.rho_bar_b);
    return {std::abs(opt.u_out) > std::abs(base.u_out),
            "|u_out| optimized " + fmt("%.4g", std::abs(opt.u_out)) + " vs rectangular " +
                fmt("%.4g", std::abs(base.u_out)) + " (signed " + fmt("%.4g", opt.u_out) + " vs " +
                fmt("%.4g", base.u_out) + ")"};
}

// 7. Eroded field never exceeds the blueprint.
Outcome robust_ordering(const DeskRun& desk)
{
    double history_gap = -1.0;
    for (const auto& rec : desk.result.history) history_gap = std::max(history_gap, rec.erosion_gap);
    return {desk.result.completed && desk.max_erosion_gap <= 0.0 && history_gap <= 0.0,
            "max(rho_e - rho_b) over " + std::to_string(desk.result.history.size()) + " rows: " +
                fmt("%.3e", desk.max_erosion_gap)};
}

// 8. Identical histories for different worker counts.
Outcome determinism(const OptConfig& config, const DeskRun& desk, const fs::path& workdir)
{
    const DeskRun other = desk_run(config, 4);
    const std::string a = history_csv(desk.result.history);
    const std::string b = history_csv(other.result.history);
    write_file_atomic(workdir / "history_threads1.csv", a);
    write_file_atomic(workdir / "history_threads4.csv", b);
    return {desk.result.completed && other.result.completed && a == b,
            std::string(a == b ? "identical" : "different") + " history CSVs (" + std::to_string(a.size()) +
                " bytes) for 1 and 4 threads"};
}

// 9. Scalar MMA problems with known optima.
Outcome mma_examples()
{
    const auto q = testing::run_quadratic();
    const auto mm = testing::run_min_max();
    const auto lin = testing::run_bounded_linear();
    const bool pass = std::abs(q.x - 0.5) <= 1e-4 && q.updates <= 30 && std::abs(mm.x - 0.5) <= 1e-4 &&
                      mm.updates <= 50 && std::abs(lin.x - 0.2) <= 1e-6 && lin.constraint_active &&
                      lin.updates <= 50;
    return {pass, "(x-0.5)^2: x " + fmt("%.8f", q.x) + " after " + std::to_string(q.updates) + " updates; " +
                      "max{x,1-x}: x " + fmt("%.8f", mm.x) + " after " + std::to_string(mm.updates) + "; " +
                      "-x s.t. x <= 0.2: x " + fmt("%.9f", lin.x) + " after " + std::to_string(lin.updates) +
                      (lin.constraint_active ? ", constraint active" : ", constraint inactive")};
}

int usage()
{
    std::cerr << "usage: pneutop_acceptance --configs <dir> --workdir <dir>\n";
    return 2;
}

} // namespace

int main(int argc, char** argv)
{
    fs::path configs, workdir;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--configs" && i + 1 < argc) configs = argv[++i];
        else if (arg == "--workdir" && i + 1 < argc) workdir = argv[++i];
        else return usage();
    }
    if (configs.empty() || workdir.empty()) return usage();
    fs::create_directories(workdir);

    try {
        report(1, "adjoint gradients vs central differences", adjoint_vs_fd());
        report(2, "load-term ablation changes the gradient", load_term_ablation());
        report(3, "Darcy calibration", darcy_calibration());
        report(4, "pressure bounds", pressure_bounds());

        const OptConfig desk_config = parse_config(configs / "desk.cfg");
        const DeskRun desk = desk_run(desk_config, 1);
        write_file_atomic(workdir / "desk_rho_blueprint.txt",
                          density_matrix_text(desk_config.domain.nelx, desk_config.domain.nely, desk.result.rho_bar_b));
        report(5, "desk-scale run", desk_behaviour(desk_config, desk));
        report(6, "optimized vs rectangular chamber", beats_baseline(desk_config, desk));
        report(7, "eroded <= blueprint at every iteration", robust_ordering(desk));
        report(8, "thread-count determinism", determinism(desk_config, desk, workdir));
        report(9, "MMA analytic examples", mma_examples());
    } catch (const std::exception& e) {
        std::cout << "FAIL aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
