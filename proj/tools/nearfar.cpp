#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "nearfar/commands.hpp"
#include "nearfar/config.hpp"
#include "nearfar/errors.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string out;
    bool quiet = false;
};

nearfar::PipelineConfig resolve_config(const GlobalOpts& opts) {
    nearfar::PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = nearfar::load_config(opts.config_path);
    if (opts.seed) {
        if (*opts.seed < 0) throw nearfar::ConfigError("--seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(*opts.seed);
    }
    return cfg;
}

fs::path require_out(const GlobalOpts& opts, const char* cmd) {
    if (opts.out.empty()) {
        throw nearfar::UsageError(std::string(cmd) + " requires --out");
    }
    return fs::path(opts.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-to-far track-back labeling and loss-weighted sampling"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "flat JSON config of dotted keys")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", opts.seed, "global random seed");
    app.add_option("--out", opts.out, "output file or directory");
    app.add_flag("--quiet", opts.quiet, "suppress progress output");

    auto* simulate = app.add_subcommand("simulate", "generate synthetic ground-truth sequences");

    std::string gt_path;
    auto* label = app.add_subcommand("label", "track-back labeling from sparse keyframes");
    label->add_option("--gt", gt_path, "ground-truth JSONL file or directory")->required();

    std::string sample_in;
    std::optional<double> fraction;
    std::optional<std::int64_t> sample_m;
    auto* sample = app.add_subcommand("sample", "loss-weighted reduction of a label set");
    sample->add_option("--in", sample_in, "labels JSONL")->required();
    sample->add_option("--fraction", fraction, "expected fraction of images to keep");
    sample->add_option("--m", sample_m, "expected number of images to keep");

    std::string eff_in;
    std::string grid_text;
    auto* efficiency = app.add_subcommand("efficiency", "relative-variance curve over a fraction grid");
    efficiency->add_option("--in", eff_in, "labels JSONL")->required();
    efficiency->add_option("--grid", grid_text, "start:stop:step or comma list (default 0.05:1:0.05)");

    std::string pred_path;
    std::string eval_gt_path;
    double iou_threshold = 0.5;
    auto* eval = app.add_subcommand("eval", "average precision of labels against ground truth");
    eval->add_option("--pred", pred_path, "predicted labels JSONL")->required();
    eval->add_option("--gt", eval_gt_path, "ground-truth JSONL")->required();
    eval->add_option("--iou", iou_threshold, "IoU threshold (default 0.5)");

    std::string pairs_csv;
    auto* analyze = app.add_subcommand("analyze", "least-squares fit of a paired x,y series");
    analyze->add_option("--pairs", pairs_csv, "two-column CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const nearfar::PipelineConfig cfg = resolve_config(opts);
        const std::optional<fs::path> out_opt =
            opts.out.empty() ? std::nullopt : std::make_optional(fs::path(opts.out));

        if (simulate->parsed()) {
            nearfar::cmd_simulate(cfg, require_out(opts, "simulate"));
            if (!opts.quiet) std::cout << "wrote " << opts.out << "\n";
        } else if (label->parsed()) {
            nearfar::cmd_label(cfg, gt_path, require_out(opts, "label"));
            if (!opts.quiet) std::cout << "wrote " << opts.out << "\n";
        } else if (sample->parsed()) {
            nearfar::cmd_sample(cfg, sample_in, fraction, sample_m, require_out(opts, "sample"));
            if (!opts.quiet) std::cout << "wrote " << opts.out << "\n";
        } else if (efficiency->parsed()) {
            nearfar::cmd_efficiency(cfg, eff_in, nearfar::parse_fraction_grid(grid_text),
                                    require_out(opts, "efficiency"));
            if (!opts.quiet) std::cout << "wrote " << opts.out << "\n";
        } else if (eval->parsed()) {
            nearfar::cmd_eval(cfg, pred_path, eval_gt_path, iou_threshold, out_opt, opts.quiet);
        } else if (analyze->parsed()) {
            nearfar::cmd_analyze(pairs_csv, out_opt, opts.quiet);
        }
    } catch (const nearfar::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const nearfar::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nearfar::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 3;
    } catch (const nearfar::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
