// Command-line front end: optimize, analyze, fd-check, export-contour, baseline.

#include "pneutop/baseline.hpp"
#include "pneutop/config.hpp"
#include "pneutop/contour.hpp"
#include "pneutop/errors.hpp"
#include "pneutop/export.hpp"
#include "pneutop/parallel.hpp"
#include "pneutop/robust_driver.hpp"
#include "pneutop/sensitivity.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace pneutop;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

fs::path output_dir(const std::string& configured, const std::string& flag)
{
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("PNEUTOP_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
    return configured;
}

void write_field_set(const fs::path& dir, const std::string& stem, const DomainModel& d, const Vector& field)
{
    write_file_atomic(dir / (stem + ".txt"), density_matrix_text(d.nelx(), d.nely(), field));
    write_file_atomic(dir / (stem + ".pgm"), density_pgm(d.nelx(), d.nely(), field));
}

void write_contours(const fs::path& dir, const std::string& stem, const DomainModel& d, const Vector& field)
{
    const auto loops = extract_contour(d.nelx(), d.nely(), d.elem_size(), field, 0.5);
    write_file_atomic(dir / (stem + ".svg"), contours_svg(loops, d.nelx() * d.elem_size(), d.nely() * d.elem_size()));
    write_file_atomic(dir / (stem + ".segments.txt"), contours_segments(loops));
}

std::string snapshot_name(const char* stem, int iter)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d", stem, iter);
    return buf;
}

int cmd_optimize(const std::string& config_path, const std::string& out_flag, bool quiet)
{
    const OptConfig config = parse_config(config_path);
    const fs::path dir = output_dir(config.output.directory, out_flag);
    const DomainModel domain = build_domain(config.domain);
    write_file_atomic(dir / "config.cfg", echo_config(config));

    std::ostringstream log;
    log << "config " << fs::absolute(config_path).string() << "\n";
    log << "mesh " << domain.nelx() << "x" << domain.nely() << ", design variables " << domain.num_design_variables()
        << ", threads " << num_threads() << "\n";
    log << "nu " << format_double(config.nu) << ", delta_eta " << format_double(config.optimization.delta_eta)
        << ", delta_s " << format_double(config.physics().flow.delta_s) << "\n";

    const auto start = std::chrono::steady_clock::now();
    bool se_logged = false;
    auto observer = [&](const IterationRecord& r, const RobustEvaluation& ev, const Vector&) {
        if (!se_logged) {
            log << "se_star " << format_double(ev.se_star) << "\n";
            se_logged = true;
        }
        const int k = config.output.snapshot_interval;
        if (k > 0 && (r.iter - 1) % k == 0)
            write_field_set(dir / "snapshots", snapshot_name("rho_bar_b", r.iter), domain, ev.field.blueprint.value);
        if (!quiet)
            std::cout << "it " << r.iter << " beta " << r.beta << " f_b " << r.f_b << " f_e " << r.f_e << " g1 "
                      << r.g1 << " g2 " << r.g2 << " gray " << r.grayness << " change " << r.change << std::endl;
    };

    const OptimizationResult result = run(config, observer);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_file_atomic(dir / "history.csv", history_csv(result.history));
    if (result.x.size() > 0) {
        write_field_set(dir, "rho", domain, expand_design(domain, result.x));
        write_field_set(dir, "rho_bar_b", domain, result.rho_bar_b);
        write_field_set(dir, "rho_bar_e", domain, result.rho_bar_e);
        if (config.output.contours) write_contours(dir, "contour_b", domain, result.rho_bar_b);
        if (config.output.vtk && result.final_evaluation) {
            const auto& ev = *result.final_evaluation;
            write_file_atomic(dir / "blueprint.vtk", fields_vtk(domain, ev.field.blueprint.value, ev.pressure_b,
                                                                ev.displacement_b, "pneutop blueprint"));
            write_file_atomic(dir / "eroded.vtk", fields_vtk(domain, ev.field.eroded.value, ev.pressure_e,
                                                             ev.displacement_e, "pneutop eroded"));
        }
    }
    log << "iterations " << result.history.size() << ", wall time " << seconds << " s\n";
    log << "mma relaxed steps " << result.mma_relaxed_steps << ", non-monotone subproblem solves "
        << result.mma_nonmonotone_steps << "\n";
    if (!result.history.empty()) {
        const auto& last = result.history.back();
        log << "final f_b " << format_double(last.f_b) << " f_e " << format_double(last.f_e) << " g1 "
            << format_double(last.g1) << " g2 " << format_double(last.g2) << " grayness "
            << format_double(last.grayness) << "\n";
    }
    if (!result.completed) log << "error " << result.error << "\n";
    write_file_atomic(dir / "run.log", log.str());
    std::cout << log.str();
    std::cout << "output written to " << dir.string() << std::endl;
    if (!result.completed) {
        std::cerr << "solver failure: " << result.error << std::endl;
        return kExitSolver;
    }
    return 0;
}

Vector load_density(const std::string& path, const DomainModel& domain)
{
    const auto m = parse_density_matrix(read_file(path));
    if (m.nelx != domain.nelx() || m.nely != domain.nely())
        throw ConfigError("density file " + path + " is " + std::to_string(m.nelx) + "x" + std::to_string(m.nely) +
                          " but the config mesh is " + std::to_string(domain.nelx()) + "x" +
                          std::to_string(domain.nely()));
    if ((m.values.array() < 0.0).any() || (m.values.array() > 1.0).any())
        throw ConfigError("density file " + path + " has values outside [0, 1]");
    return m.values;
}

void print_analysis_row(const std::string& label, const Analysis& a)
{
    std::cout << "design,u_out,abs_u_out,g1,strain_energy\n";
    std::cout << label << ',' << format_double(a.u_out) << ',' << format_double(std::abs(a.u_out)) << ','
              << format_double(a.g1) << ',' << format_double(a.strain_energy) << '\n';
}

int cmd_analyze(const std::string& density_path, const std::string& config_path, const std::string& out_flag)
{
    const OptConfig config = parse_config(config_path);
    const DomainModel domain = build_domain(config.domain);
    const Vector rho_bar = load_density(density_path, domain);
    const Analysis a = analyze(config, rho_bar);
    print_analysis_row(fs::path(density_path).stem().string(), a);
    const fs::path dir = output_dir(config.output.directory, out_flag);
    if (config.output.vtk)
        write_file_atomic(dir / "analysis.vtk", fields_vtk(domain, rho_bar, a.pressure, a.displacement, "pneutop analysis"));
    return 0;
}

int cmd_fd_check(const std::string& config_path, std::vector<int> elements, double h, double beta,
                 std::uint64_t seed, const std::string& out_flag)
{
    const OptConfig config = parse_config(config_path);
    RobustProblem problem(config);
    const auto& d = problem.domain();

    // Random interior design so no variable sits on a bound.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.1, 0.9);
    Vector x(problem.num_variables());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = dist(rng);

    const RobustEvaluation ev = problem.evaluate(x, beta, std::nullopt, true);
    const double se_star = ev.se_star;

    // Requested ids are element numbers; map them to design variables.
    std::vector<int> variables;
    const auto design = d.design_elements();
    if (elements.empty()) {
        for (int v = 0; v < problem.num_variables(); ++v) variables.push_back(v);
    } else {
        for (int e : elements) {
            const auto it = std::find(design.begin(), design.end(), e);
            if (it == design.end()) throw ConfigError("element " + std::to_string(e) + " is not a design element");
            variables.push_back(static_cast<int>(it - design.begin()));
        }
    }

    const bool b_active = ev.f_b >= ev.f_e;
    const Vector& df_unit = b_active ? ev.blueprint.df_drho : ev.eroded.df_drho;
    const std::array<const Vector*, 3> analytic{&df_unit, &ev.blueprint.dg1_drho, &ev.eroded.dg2_drho};

    const FdResult fd = fd_oracle(make_fd_evaluator(problem, beta, se_star), x, variables, h);

    std::ostringstream csv;
    csv << "element,quantity,analytic,fd,rel_error\n";
    std::array<double, 3> scale{}, worst{};
    for (std::size_t q = 0; q < 3; ++q)
        for (const auto& g : fd.gradient) scale[q] = std::max(scale[q], std::abs(g[q]));
    for (std::size_t k = 0; k < variables.size(); ++k) {
        const int v = variables[k];
        for (std::size_t q = 0; q < 3; ++q) {
            const double a = (*analytic[q])[v];
            const double f = fd.gradient[k][q];
            const double err = relative_error(a, f, scale[q]);
            worst[q] = std::max(worst[q], err);
            csv << design[static_cast<std::size_t>(v)] << ',' << kFdQuantityNames[q] << ',' << format_double(a) << ','
                << format_double(f) << ',' << format_double(err) << '\n';
        }
    }
    std::ostringstream summary;
    summary << "quantity,max_rel_error,noise_floor\n";
    for (std::size_t q = 0; q < 3; ++q)
        summary << kFdQuantityNames[q] << ',' << format_double(worst[q]) << ',' << format_double(fd.noise_floor[q])
                << '\n';

    std::cout << csv.str() << '\n' << summary.str();
    for (const auto& w : fd.warnings) std::cerr << "warning: " << w << '\n';
    const fs::path dir = output_dir(config.output.directory, out_flag);
    write_file_atomic(dir / "fd_check.csv", csv.str());
    write_file_atomic(dir / "fd_check_summary.csv", summary.str());
    return 0;
}

int cmd_export_contour(const std::string& density_path, double elem_size, double level, const std::string& out_flag)
{
    const auto m = parse_density_matrix(read_file(density_path));
    const auto loops = extract_contour(m.nelx, m.nely, elem_size, m.values, level);
    const fs::path dir = out_flag.empty() ? output_dir(".", "") : fs::path(out_flag);
    const std::string stem = fs::path(density_path).stem().string();
    write_file_atomic(dir / (stem + "_contour.svg"), contours_svg(loops, m.nelx * elem_size, m.nely * elem_size));
    write_file_atomic(dir / (stem + "_contour.segments.txt"), contours_segments(loops));
    std::cout << "loops " << loops.size() << ", enclosed area " << format_double(total_signed_area(loops))
              << ", written to " << dir.string() << std::endl;
    return 0;
}

int cmd_baseline(const std::string& config_path, const std::string& out_flag)
{
    const OptConfig config = parse_config(config_path);
    const DomainModel domain = build_domain(config.domain);
    const Vector rho = baseline_rectangular(domain, config.baseline);
    const fs::path dir = output_dir(config.output.directory, out_flag);
    write_field_set(dir, "baseline", domain, rho);
    const Analysis a = analyze(config, rho);
    print_analysis_row("baseline", a);
    if (config.output.vtk)
        write_file_atomic(dir / "baseline.vtk", fields_vtk(domain, rho, a.pressure, a.displacement, "pneutop baseline"));
    std::cout << "solid fraction " << format_double(rho.mean()) << ", written to " << dir.string() << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"pneutop: robust topology optimization of pneumatically actuated soft units"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 1;
    std::string out_flag;
    app.add_option("--threads", threads, "worker threads for element loops (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    app.add_option("-o,--output", out_flag, "output directory (overrides PNEUTOP_OUTPUT_DIR and the config)");

    std::string config_path, density_path;
    bool quiet = false;
    auto* optimize = app.add_subcommand("optimize", "run the blueprint/eroded min-max optimization");
    optimize->add_option("config", config_path, "config file")->required();
    optimize->add_flag("-q,--quiet", quiet, "suppress per-iteration output");

    auto* analyze_cmd = app.add_subcommand("analyze", "solve pressure and displacement for a density field");
    analyze_cmd->add_option("density", density_path, "density matrix file (physical densities)")->required();
    analyze_cmd->add_option("config", config_path, "config file")->required();

    std::vector<int> elements;
    double h = 1e-6, beta = 2.0;
    std::uint64_t seed = 1;
    auto* fd = app.add_subcommand("fd-check", "compare adjoint gradients with central differences");
    fd->add_option("config", config_path, "config file")->required();
    fd->add_option("--elements", elements, "element ids to check (default: all design elements)")->delimiter(',');
    fd->add_option("--step", h, "finite-difference step")->check(CLI::PositiveNumber);
    fd->add_option("--beta", beta, "projection steepness")->check(CLI::Range(1.0, 1024.0));
    fd->add_option("--seed", seed, "seed of the random design");

    double level = 0.5, elem_size = 1.0;
    auto* contour = app.add_subcommand("export-contour", "extract the 0.5 iso-contour of a density field");
    contour->add_option("density", density_path, "density matrix file")->required();
    contour->add_option("--level", level, "iso-level")->check(CLI::Range(0.0, 1.0));
    contour->add_option("--elem-size", elem_size, "element edge length")->check(CLI::PositiveNumber);

    auto* baseline = app.add_subcommand("baseline", "build and analyze the rectangular chamber design");
    baseline->add_option("config", config_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitConfig;
    }

    set_num_threads(threads);
    try {
        if (*optimize) return cmd_optimize(config_path, out_flag, quiet);
        if (*analyze_cmd) return cmd_analyze(density_path, config_path, out_flag);
        if (*fd) return cmd_fd_check(config_path, elements, h, beta, seed, out_flag);
        if (*contour) return cmd_export_contour(density_path, elem_size, level, out_flag);
        if (*baseline) return cmd_baseline(config_path, out_flag);
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << std::endl;
        return kExitSolver;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitConfig;
    }
    return kExitConfig;
}
