#include "hybridfv/config.hpp"
#include "hybridfv/hybrid.hpp"
#include "hybridfv/metrics.hpp"
#include "hybridfv/report.hpp"
#include "hybridfv/snapshot.hpp"
#include "hybridfv/solver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace hybridfv;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    int threads = 1;
};

void warn_threads(int threads) {
    if (threads != 1)
        std::cerr << "warning: multithreaded execution is not implemented; "
                     "running single-threaded\n";
}

fs::path run_dir(const CaseConfig& config, const std::string& override_dir) {
    fs::path dir = override_dir.empty() ? fs::path(resolve_output_dir(config))
                                        : fs::path(override_dir);
    fs::create_directories(dir);
    return dir;
}

SnapshotSink disk_sink(const StructuredGrid& grid, double dt, const fs::path& dir) {
    fs::create_directories(dir);
    return [&grid, dt, dir](long step, const FieldState& state) {
        write_snapshot(grid, state, dt, (dir / snapshot_filename(step)).string());
    };
}

std::vector<std::pair<long, FieldState>> load_trajectory(const StructuredGrid& g,
                                                         const std::string& dir) {
    std::vector<std::pair<long, FieldState>> out;
    for (const auto& [step, path] : list_snapshots(dir))
        out.emplace_back(step, read_snapshot_for_grid(g, path));
    if (out.empty())
        throw std::runtime_error("no snapshots found under " + dir);
    return out;
}

int cmd_cfd_run(const CommonOpts& opts, long steps_override) {
    const CaseConfig config = load_config(opts.config_path);
    const CaseSetup setup = make_setup(config);
    const fs::path dir = run_dir(config, opts.out_override);
    const long steps = steps_override > 0 ? steps_override
                                          : config.hybrid.total_steps;
    const SnapshotSink sink = disk_sink(setup.grid, config.dt, dir / "snapshots");
    cfd_reference_run(setup, steps, sink);
    std::cout << "wrote " << steps << " solver steps to " << (dir / "snapshots")
              << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, std::string out_path) {
    const CaseConfig config = load_config(opts.config_path);
    const CaseSetup setup = make_setup(config);
    if (out_path.empty())
        out_path = (run_dir(config, opts.out_override) / "model_initial.ckpt").string();

    CfdSolver solver(setup.grid, setup.physics, setup.boundaries, setup.pcg);
    FieldState state = solver.initial_state();
    std::vector<FieldState> burst =
        solver.run_burst(state, setup.hybrid.initial_cfd_steps);
    std::vector<FieldState> buffer(burst.end() - setup.hybrid.tl_buffer, burst.end());

    SurrogateModel model(setup.model_shape, setup.grid, setup.boundaries,
                         setup.physics.dt, setup.seed);
    model.fit_normalization(buffer);
    const TrainReport report = model.train(buffer, setup.hybrid.initial_epochs, false);
    const std::string tmp = out_path + ".partial";
    save_checkpoint(model, tmp);
    fs::rename(tmp, out_path);
    std::cout << "initial training: best val loss " << report.best_val_loss
              << " at epoch " << report.best_epoch << "; checkpoint " << out_path
              << "\n";
    return 0;
}

int cmd_hybrid_run(const CommonOpts& opts, const std::string& pretrained) {
    const CaseConfig config = load_config(opts.config_path);
    const CaseSetup setup = make_setup(config);
    const fs::path dir = run_dir(config, opts.out_override);
    const SnapshotSink sink = disk_sink(setup.grid, config.dt, dir / "snapshots");

    const std::string best_path = (dir / "model_best.ckpt").string();
    const CheckpointSink ckpt_sink = [&](const SurrogateModel& model) {
        const std::string tmp = best_path + ".partial";
        save_checkpoint(model, tmp);
        fs::rename(tmp, best_path);
    };

    HybridRunResult result = hybrid_run(setup, pretrained, sink, ckpt_sink);

    {
        std::ofstream os(dir / "ledger.txt", std::ios::trunc);
        print_ledger(result.ledger, config.hybrid.total_steps, os);
    }
    print_ledger(result.ledger, config.hybrid.total_steps, std::cout);
    write_ledger_csv(result.ledger, config.hybrid.total_steps,
                     config.hybrid.tl_epochs, config.hybrid.residual_threshold,
                     (dir / "ledger.csv").string());
    write_residual_trace_csv(result.ledger, (dir / "residual_trace.csv").string());
    {
        const std::string final_path = (dir / "model_final.ckpt").string();
        const std::string tmp = final_path + ".partial";
        save_checkpoint(*result.model, tmp);
        fs::rename(tmp, final_path);
    }
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& truth_dir,
             const std::string& pred_dir, std::string out_csv) {
    const CaseConfig config = load_config(config_path);
    const StructuredGrid grid = build_grid(config);
    const auto truth = load_trajectory(grid, truth_dir);
    const auto pred = load_trajectory(grid, pred_dir);
    const ErrorSeries series = compare_trajectories(grid, truth, pred);
    if (series.rows.empty())
        throw std::runtime_error("eval: the trajectories share no steps");
    if (out_csv.empty()) out_csv = "errors.csv";
    const std::string tmp = out_csv + ".partial";
    write_error_series_csv(series, tmp);
    fs::rename(tmp, out_csv);
    const auto avg = series.time_average();
    std::cout << "compared " << series.rows.size() << " snapshots; time-averaged:\n";
    for (std::size_t v = 0; v < series.var_names.size(); ++v)
        std::cout << "  " << series.var_names[v] << ": rel_l2 " << avg[v].rel_l2
                  << " mse " << avg[v].mse << " mae " << avg[v].mae << " maxae "
                  << avg[v].maxae << "\n";
    std::cout << "wrote " << out_csv << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<int>& epochs,
              const std::vector<double>& thresholds, std::string out_csv,
              const std::string& pretrained) {
    const CaseConfig config = load_config(opts.config_path);
    const CaseSetup setup = make_setup(config);
    const auto rows = benchmark_sweep(setup, epochs, thresholds, pretrained);
    if (out_csv.empty())
        out_csv = (run_dir(config, opts.out_override) / "sweep.csv").string();
    const std::string tmp = out_csv + ".partial";
    write_sweep_csv(rows, tmp);
    fs::rename(tmp, out_csv);
    std::cout << "wrote " << rows.size() << " sweep rows to " << out_csv << "\n";
    return 0;
}

int cmd_probe(const CommonOpts& opts, const std::string& traj_dir,
              std::string out_csv, const std::string& points_arg) {
    const CaseConfig config = load_config(opts.config_path);
    const StructuredGrid grid = build_grid(config);

    std::vector<std::array<double, 3>> points;
    if (points_arg.empty()) {
        points = default_probe_points(grid);
    } else {
        std::istringstream iss(points_arg);
        std::string tok;
        while (std::getline(iss, tok, ';')) {
            std::array<double, 3> p{0, 0, 0};
            std::istringstream ps(tok);
            std::string c;
            int a = 0;
            while (std::getline(ps, c, ',') && a < 3) p[a++] = std::stod(c);
            if (a < grid.axes)
                throw std::runtime_error("probe: point '" + tok + "' has too few coordinates");
            points.push_back(p);
        }
    }

    const auto traj = load_trajectory(grid, traj_dir);
    if (out_csv.empty()) out_csv = "probes.csv";
    const std::string tmp = out_csv + ".partial";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp);
        os << "step,time";
        for (std::size_t p = 0; p < points.size(); ++p) {
            os << ",p" << p << "_ux,p" << p << "_uy";
            if (grid.axes == 3) os << ",p" << p << "_uz";
            os << ",p" << p << "_T,p" << p << "_umag";
        }
        os << "\n";
        os.precision(12);
        for (const auto& [step, state] : traj) {
            os << step << "," << state.time;
            for (const auto& r : probe_sample(grid, state, points)) {
                double mag = 0;
                for (int a = 0; a < grid.axes; ++a) mag += r.u[a] * r.u[a];
                os << "," << r.u[0] << "," << r.u[1];
                if (grid.axes == 3) os << "," << r.u[2];
                os << "," << r.T << "," << std::sqrt(mag);
            }
            os << "\n";
        }
    }
    fs::rename(tmp, out_csv);
    std::cout << "wrote probe series for " << points.size() << " points to "
              << out_csv << "\n";
    return 0;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream iss(s);
    std::string tok;
    while (std::getline(iss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"residual-guided hybrid solver/surrogate simulation driver"};
    app.require_subcommand(1);

    CommonOpts opts;
    long steps_override = 0;
    std::string pretrained, out_path, points_arg, epochs_arg = "2",
                thresholds_arg = "5";
    std::string truth_dir, pred_dir, traj_dir;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        if (needs_config)
            cmd->add_option("--config", opts.config_path, "case configuration file")
                ->required();
        cmd->add_option("--out", opts.out_override, "output directory override");
        cmd->add_option("--threads", opts.threads,
                        "worker threads (only 1 is supported)");
    };

    CLI::App* cfd = app.add_subcommand("cfd-run", "pure solver trajectory");
    add_common(cfd);
    cfd->add_option("--steps", steps_override, "override hybrid.total_steps");

    CLI::App* train = app.add_subcommand("train", "initial burst and training");
    add_common(train);
    train->add_option("--model-out", out_path, "checkpoint path");

    CLI::App* hybrid = app.add_subcommand("hybrid-run", "full hybrid loop");
    add_common(hybrid);
    hybrid->add_option("--pretrained", pretrained,
                       "checkpoint to adapt instead of training from scratch");

    CLI::App* eval = app.add_subcommand("eval", "error series of two trajectories");
    eval->add_option("--config", opts.config_path, "case configuration file")
        ->required();
    eval->add_option("truth_dir", truth_dir, "ground-truth snapshot directory")
        ->required();
    eval->add_option("pred_dir", pred_dir, "predicted snapshot directory")
        ->required();
    eval->add_option("--out", out_path, "output CSV path");

    CLI::App* sweep = app.add_subcommand("sweep", "hyperparameter sweep table");
    add_common(sweep);
    sweep->add_option("--epochs", epochs_arg, "comma-separated TL epoch counts");
    sweep->add_option("--thresholds", thresholds_arg,
                      "comma-separated residual thresholds");
    sweep->add_option("--csv", out_path, "output CSV path");
    sweep->add_option("--pretrained", pretrained, "checkpoint for every run");

    CLI::App* probe = app.add_subcommand("probe", "per-probe time series");
    probe->add_option("--config", opts.config_path, "case configuration file")
        ->required();
    probe->add_option("trajectory_dir", traj_dir, "snapshot directory")->required();
    probe->add_option("--out", out_path, "output CSV path");
    probe->add_option("--points", points_arg,
                      "semicolon-separated x,y[,z] coordinates");

    CLI11_PARSE(app, argc, argv);
    warn_threads(opts.threads);

    try {
        if (cfd->parsed()) return cmd_cfd_run(opts, steps_override);
        if (train->parsed()) return cmd_train(opts, out_path);
        if (hybrid->parsed()) return cmd_hybrid_run(opts, pretrained);
        if (eval->parsed())
            return cmd_eval(opts.config_path, truth_dir, pred_dir, out_path);
        if (sweep->parsed())
            return cmd_sweep(opts, parse_int_list(epochs_arg),
                             parse_double_list(thresholds_arg), out_path, pretrained);
        if (probe->parsed()) return cmd_probe(opts, traj_dir, out_path, points_arg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
