// steergen command-line front end: reproducible simulate / odometry / label /
// eval runs plus the self-supervised regression demo. Exit codes: 0 success,
// 1 usage error, 2 data or parse error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steergen/config.hpp"
#include "steergen/errors.hpp"
#include "steergen/runner.hpp"
#include "steergen/ssrl.hpp"
#include "steergen/version.hpp"

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

steergen::Config resolve_config(const GlobalOptions& opts) {
    nlohmann::json doc = nlohmann::json::object();
    if (!opts.config_path.empty()) doc = steergen::load_config_json(opts.config_path);
    for (const auto& ov : opts.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw steergen::SchemaError(ov, "override must look like section.key=value");
        steergen::apply_override(doc, ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (opts.seed) {
        steergen::apply_override(doc, "simulator.world.seed", std::to_string(*opts.seed));
        steergen::apply_override(doc, "simulator.noise_seed", std::to_string(*opts.seed));
        steergen::apply_override(doc, "ssrl.seed", std::to_string(*opts.seed));
    }
    return steergen::config_from_json(doc);
}

void print_eval(const steergen::EvalReport& report) {
    std::cout << "MSE " << steergen::format_double(report.mse) << " rad^2 over " << report.n_frames
              << " frames (" << report.n_invalid << " invalid)\n";
    for (const auto& b : report.bins)
        std::cout << "  |truth| in [" << steergen::format_double(b.abs_truth_lo) << ", "
                  << steergen::format_double(b.abs_truth_hi) << "]: mse "
                  << steergen::format_double(b.mse) << " (n=" << b.n << ")\n";
    std::cout << steergen::eval_report_to_json(report).dump() << "\n";
}

int cmd_ssrl_demo(const steergen::Config& cfg, const std::string& out_dir, bool sweep_bias,
                  bool use_mlp) {
    std::vector<double> biases = {cfg.ssrl.task.bias_g};
    if (sweep_bias) biases = {0.0, 0.2, 0.5};

    std::ostringstream csv;
    csv << "bias_g,seed,lhs,gap_term,variance_term,lhs_closed_form,gap_closed_form,"
           "relative_mismatch\n";
    nlohmann::json rows = nlohmann::json::array();

    for (double bias : biases) {
        steergen::GaussianTaskConfig task = cfg.ssrl.task;
        task.bias_g = bias;
        for (std::size_t s = 0; s < cfg.ssrl.seeds; ++s) {
            task.seed = cfg.ssrl.task.seed + s;
            const steergen::GaussianDataset data = steergen::make_task(task);
            const steergen::LinearRegressor f_ssil =
                steergen::train(data, steergen::TrainMode::ssil);
            const steergen::LinearRegressor f_sup =
                steergen::train(data, steergen::TrainMode::supervised);
            const steergen::DecompositionReport rep = steergen::error_decomposition(
                f_ssil, f_sup, task, cfg.ssrl.n_test, task.seed + 7919);

            std::cout << "bias_g=" << steergen::format_double(bias) << " seed=" << task.seed
                      << "  lhs=" << steergen::format_double(rep.lhs)
                      << "  gap=" << steergen::format_double(rep.gap_term)
                      << "  var=" << steergen::format_double(rep.variance_term)
                      << "  closed-form lhs=" << steergen::format_double(rep.lhs_closed_form)
                      << "  mismatch=" << steergen::format_double(rep.relative_mismatch()) << "\n";
            csv << steergen::format_double(bias) << "," << task.seed << ","
                << steergen::format_double(rep.lhs) << "," << steergen::format_double(rep.gap_term)
                << "," << steergen::format_double(rep.variance_term) << ","
                << steergen::format_double(rep.lhs_closed_form) << ","
                << steergen::format_double(rep.gap_closed_form) << ","
                << steergen::format_double(rep.relative_mismatch()) << "\n";
            rows.push_back({{"bias_g", bias},
                            {"seed", task.seed},
                            {"lhs", rep.lhs},
                            {"gap_term", rep.gap_term},
                            {"variance_term", rep.variance_term},
                            {"lhs_closed_form", rep.lhs_closed_form},
                            {"gap_closed_form", rep.gap_closed_form},
                            {"relative_mismatch", rep.relative_mismatch()}});

            if (use_mlp) {
                const steergen::RegressionProblem prob = steergen::ssil_problem(data);
                const steergen::MlpRegressor mlp =
                    steergen::train_mlp(prob, 16, 0.05, 2000, task.seed);
                steergen::GaussianTaskConfig test_cfg = task;
                test_cfg.n = cfg.ssrl.n_test;
                test_cfg.seed = task.seed + 7919;
                const steergen::GaussianDataset test = steergen::make_task(test_cfg);
                double mse = 0.0;
                for (std::size_t i = 0; i < test.size(); ++i) {
                    const double e = mlp.predict(test.x_jc[i]) - test.y[i];
                    mse += e * e;
                }
                mse /= static_cast<double>(test.size());
                std::cout << "  mlp lhs=" << steergen::format_double(mse) << "\n";
                rows.back()["mlp_lhs"] = mse;
            }
        }
    }
    std::cout << nlohmann::json{{"report", rows}}.dump() << "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        steergen::atomic_write(fs::path(out_dir) / "ssrl_report.csv", csv.str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo steering-angle labels from LiDAR odometry, with a deterministic "
                 "driving simulator and a self-supervised regression demo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("steergen ") + steergen::kVersion +
                                          " (config schema " +
                                          std::to_string(steergen::kConfigSchemaVersion) + ")");

    GlobalOptions global;
    app.add_option("--config", global.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--set", global.overrides,
                   "config override by dotted path, e.g. --set vehicle.wheelbase_m=2.924");
    app.add_option("--seed", global.seed, "seed for world, LiDAR noise, and the regression demo");
    app.add_option("--threads", global.threads,
                   "worker threads; 1 is the deterministic reference mode (and currently the "
                   "only implemented mode)")
        ->check(CLI::PositiveNumber);

    std::string out_dir, scans_dir, trajectory_path, labels_path, truth_path;
    std::string predictor = "proposed";
    bool sweep_bias = false;
    bool use_mlp = false;
    std::optional<std::size_t> k_override;

    CLI::App* sim = app.add_subcommand("simulate", "generate a driving log in the simulator");
    sim->add_option("--out", out_dir, "output directory")->required();

    CLI::App* odo = app.add_subcommand("odometry", "estimate a trajectory from scans");
    odo->add_option("--scans", scans_dir, "directory of scan_*.ply files")->required();
    odo->add_option("--out", out_dir, "output directory")->required();

    CLI::App* lab = app.add_subcommand("label", "pseudo-labels from a trajectory");
    lab->add_option("--trajectory", trajectory_path, "trajectory JSONL file")->required();
    lab->add_option("--out", out_dir, "output directory")->required();
    lab->add_option("--k", k_override, "temporal interval between the two poses of a pair");
    lab->add_option("--predictor", predictor, "proposed | pid")
        ->check(CLI::IsMember({"proposed", "pid"}));

    CLI::App* evl = app.add_subcommand("eval", "MSE of predictions against ground truth");
    evl->add_option("--labels", labels_path, "labels CSV")->required();
    evl->add_option("--truth", truth_path, "ground-truth CSV")->required();

    CLI::App* demo = app.add_subcommand("ssrl-demo", "self-supervised regression demo");
    demo->add_option("--out", out_dir, "directory for the CSV report (optional)");
    demo->add_flag("--sweep-bias", sweep_bias, "run pseudo-predictor biases 0, 0.2, 0.5");
    demo->add_flag("--mlp", use_mlp, "also train the small nonlinear regressor");

    CLI::App* full = app.add_subcommand("full", "simulate -> odometry -> label -> eval");
    full->add_option("--out", out_dir, "output directory")->required();
    full->add_option("--k", k_override, "temporal interval between the two poses of a pair");
    full->add_option("--predictor", predictor, "proposed | pid")
        ->check(CLI::IsMember({"proposed", "pid"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (k_override) global.overrides.push_back("pipeline.k=" + std::to_string(*k_override));
        const steergen::Config cfg = resolve_config(global);
        const steergen::LabelSource source =
            predictor == "pid" ? steergen::LabelSource::pid : steergen::LabelSource::proposed;

        if (sim->parsed()) {
            const steergen::DrivingLog log = steergen::run_simulate(cfg, out_dir);
            std::cout << "wrote " << log.size() << " frames to " << out_dir << "\n";
        } else if (odo->parsed()) {
            const steergen::TrajectoryEstimate traj = steergen::run_odometry(cfg, scans_dir, out_dir);
            std::cout << "estimated " << traj.size() << " poses to " << out_dir << "\n";
        } else if (lab->parsed()) {
            const auto records = steergen::run_label(cfg, trajectory_path, out_dir, source);
            std::cout << "wrote " << records.size() << " labels to " << out_dir << "\n";
        } else if (evl->parsed()) {
            print_eval(steergen::run_eval(labels_path, truth_path));
        } else if (demo->parsed()) {
            return cmd_ssrl_demo(cfg, out_dir, sweep_bias, use_mlp);
        } else if (full->parsed()) {
            print_eval(steergen::run_full(cfg, out_dir, source));
        }
        return 0;
    } catch (const steergen::InsufficientOverlap& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const steergen::DegenerateGeometry& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const steergen::NonConvergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const steergen::StationaryMotion& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
