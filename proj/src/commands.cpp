#include "nearfar/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <iostream>
#include <memory>
#include <set>
#include <tuple>

#include "nearfar/dataio.hpp"
#include "nearfar/errors.hpp"
#include "nearfar/rng.hpp"

namespace nearfar {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::uint64_t seq_seed(std::uint64_t seed, const std::string& seq) {
    // FNV-1a over the sequence name so per-sequence streams are stable
    // regardless of processing order.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : seq) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    return derive_seed({seed, h});
}

void write_meta(const fs::path& out, const PipelineConfig& cfg, const std::string& command,
                const ordered_json& extra = ordered_json::object()) {
    ordered_json meta;
    meta["command"] = command;
    meta["seed"] = cfg.seed;
    for (const auto& [k, v] : extra.items()) meta[k] = v;
    meta["config"] = config_to_json(cfg);
    write_json_file(fs::path(out.string() + ".meta.json"), meta);
}

void sort_records(std::vector<LabelRecord>& records) {
    std::sort(records.begin(), records.end(), [](const LabelRecord& a, const LabelRecord& b) {
        return std::make_tuple(a.seq, a.det.frame_id, a.track_id, a.det.box.x1, a.det.box.y1) <
               std::make_tuple(b.seq, b.det.frame_id, b.track_id, b.det.box.x1, b.det.box.y1);
    });
}

std::string seq_name(int index) { return "seq" + std::to_string(index); }

ordered_json object_to_json(const SceneObject& o) {
    ordered_json j;
    j["id"] = o.id;
    j["class"] = o.class_id;
    j["size"] = o.size;
    j["z0"] = o.z0;
    j["speed"] = o.speed;
    j["lateral_offset"] = o.lateral_offset;
    j["lateral_drift"] = o.lateral_drift;
    j["focal"] = o.focal;
    return j;
}

}  // namespace

std::vector<ImageLoss> aggregate_image_losses(const std::vector<LabelRecord>& records,
                                              const PipelineConfig& cfg) {
    std::map<std::pair<std::string, std::int64_t>, std::pair<double, std::int64_t>> acc;
    for (const auto& rec : records) {
        auto& [value, count] = acc[{rec.seq, rec.det.frame_id}];
        if (cfg.sampler_aggregate == "max") {
            value = count == 0 ? rec.det.loss : std::max(value, rec.det.loss);
        } else {
            value += rec.det.loss;
        }
        ++count;
    }
    std::vector<ImageLoss> images;
    images.reserve(acc.size());
    for (const auto& [key, vc] : acc) {
        double loss = vc.first;
        if (cfg.sampler_aggregate == "mean") loss /= static_cast<double>(vc.second);
        images.push_back(ImageLoss{key.first, key.second, loss});
    }
    return images;
}

std::vector<LabelRecord> run_label_sequence(const std::string& seq, const GtMap& full_gt,
                                            const PipelineConfig& cfg) {
    if (full_gt.empty()) throw SchemaError("sequence \"" + seq + "\" has no ground truth");
    const std::int64_t frame_lo = full_gt.begin()->first;
    const std::int64_t frame_hi = full_gt.rbegin()->first;

    const GtMap sparse = sparsify(full_gt, cfg.scene_keyframe_interval);
    if (sparse.empty()) {
        throw ConfigError("keyframe interval " + std::to_string(cfg.scene_keyframe_interval) +
                          " leaves sequence \"" + seq + "\" without keyframes");
    }

    std::unique_ptr<Detector> detector;
    if (cfg.detect_kind == "synthetic") {
        detector = std::make_unique<SyntheticDetector>(&full_gt, frame_lo, frame_hi,
                                                       cfg.detect_noise, seq_seed(cfg.seed, seq));
    } else {
        if (cfg.detect_path.empty()) {
            throw ConfigError("detect.kind = \"file\" requires detect.path");
        }
        fs::path path(cfg.detect_path);
        if (fs::is_directory(path)) path /= seq + ".jsonl";
        detector = std::make_unique<FileDetector>(read_detections(path), cfg.detect_noise.hit_min);
    }

    TrackBackLabeler labeler(seq, cfg.labeler_params(), *detector);
    std::vector<LabelRecord> records = labeler.label_sequence(sparse, frame_lo, frame_hi);
    sort_records(records);
    return records;
}

std::vector<std::size_t> sample_image_indices(const std::vector<ImageLoss>& images,
                                              std::optional<double> fraction,
                                              std::optional<std::int64_t> m,
                                              const PipelineConfig& cfg, std::uint64_t seed) {
    if (fraction.has_value() == m.has_value()) {
        throw UsageError("exactly one of fraction and M must be given");
    }
    const auto n = static_cast<std::int64_t>(images.size());
    if (n == 0) throw SchemaError("no images to sample");

    std::int64_t target = 0;
    if (fraction.has_value()) {
        if (!(*fraction > 0.0) || *fraction > 1.0) {
            throw UsageError("fraction must lie in (0, 1]");
        }
        target = std::clamp<std::int64_t>(std::llround(*fraction * static_cast<double>(n)), 1, n);
    } else {
        if (*m < 1) throw UsageError("M must be >= 1");
        target = *m;
    }

    // Expecting the whole set back means keeping the whole set.
    if (target >= n) {
        std::vector<std::size_t> all(images.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }

    std::vector<double> losses(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) losses[i] = images[i].loss;

    if (cfg.sampler_mode == "multinomial") {
        return draw_sample_multinomial(losses, target, seed);
    }
    std::vector<double> weights;
    if (cfg.sampler_weighting == "standardized") {
        const std::vector<double> g = standardize(losses);
        weights.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) weights[i] = std::fabs(g[i]);
    } else {
        weights.resize(losses.size());
        for (std::size_t i = 0; i < losses.size(); ++i) weights[i] = std::fabs(losses[i]);
    }
    return draw_sample_bernoulli(clipped_probabilities(weights, target), seed);
}

void cmd_simulate(const PipelineConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);

    ordered_json manifest;
    manifest["width"] = cfg.scene_width;
    manifest["height"] = cfg.scene_height;
    manifest["frames"] = cfg.scene_frames;
    manifest["seed"] = cfg.seed;
    ordered_json seqs = ordered_json::array();

    for (int s = 0; s < cfg.scene_sequences; ++s) {
        const std::string seq = seq_name(s);
        const SceneSpec spec =
            default_scene_spec(cfg.scene_width, cfg.scene_height, cfg.scene_frames,
                               cfg.scene_objects, seq_seed(cfg.seed, seq));
        GtMap gt = generate_scene(spec);

        std::vector<LabelRecord> records = gt_to_records(seq, gt);
        sort_records(records);
        write_labels(out_dir / (seq + ".jsonl"), records);

        ordered_json sj;
        sj["name"] = seq;
        sj["seed"] = spec.seed;
        sj["min_visible_area"] = spec.min_visible_area;
        sj["z_min"] = spec.z_min;
        ordered_json objects = ordered_json::array();
        for (const auto& obj : spec.objects) objects.push_back(object_to_json(obj));
        sj["objects"] = objects;
        seqs.push_back(sj);
    }
    manifest["sequences"] = seqs;
    manifest["config"] = config_to_json(cfg);
    write_json_file(out_dir / "manifest.json", manifest);
}

void cmd_label(const PipelineConfig& cfg, const fs::path& gt_path, const fs::path& out_file) {
    const std::map<std::string, GtMap> gt_by_seq = records_to_gt(read_labels_any(gt_path));
    if (gt_by_seq.empty()) throw SchemaError("ground truth is empty: " + gt_path.string());

    std::vector<std::pair<std::string, const GtMap*>> jobs;
    for (const auto& [seq, gt] : gt_by_seq) jobs.emplace_back(seq, &gt);

    const int workers = std::min<int>(worker_count(), static_cast<int>(jobs.size()));
    std::vector<std::vector<LabelRecord>> per_seq(jobs.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            per_seq[i] = run_label_sequence(jobs[i].first, *jobs[i].second, cfg);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> futures;
        futures.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&]() {
                for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
                    per_seq[i] = run_label_sequence(jobs[i].first, *jobs[i].second, cfg);
                }
            }));
        }
        for (auto& f : futures) f.get();
    }

    std::vector<LabelRecord> records;
    for (auto& part : per_seq) {
        records.insert(records.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
    }
    sort_records(records);
    write_labels(out_file, records);
    write_meta(out_file, cfg, "label", {{"gt", gt_path.string()}});
}

void cmd_sample(const PipelineConfig& cfg, const fs::path& labels_file,
                std::optional<double> fraction, std::optional<std::int64_t> m,
                const fs::path& out_file) {
    const std::vector<LabelRecord> records = read_labels_any(labels_file);
    const std::vector<ImageLoss> images = aggregate_image_losses(records, cfg);
    const std::vector<std::size_t> kept_idx =
        sample_image_indices(images, fraction, m, cfg, cfg.seed);

    std::set<std::pair<std::string, std::int64_t>> kept;
    for (const std::size_t i : kept_idx) kept.insert({images[i].seq, images[i].frame});

    std::vector<LabelRecord> out;
    for (const auto& rec : records) {
        if (kept.contains({rec.seq, rec.det.frame_id})) out.push_back(rec);
    }
    write_labels(out_file, out);

    ordered_json extra;
    extra["in"] = labels_file.string();
    extra["images_total"] = images.size();
    extra["images_kept"] = kept.size();
    if (fraction) extra["fraction"] = *fraction;
    if (m) extra["M"] = *m;
    write_meta(out_file, cfg, "sample", extra);
}

void cmd_efficiency(const PipelineConfig& cfg, const fs::path& labels_file,
                    const std::vector<double>& grid, const fs::path& out_csv) {
    const std::vector<LabelRecord> records = read_labels_any(labels_file);
    const std::vector<ImageLoss> images = aggregate_image_losses(records, cfg);
    std::vector<double> losses(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) losses[i] = images[i].loss;

    const std::vector<EfficiencyPoint> curve = efficiency_curve(losses, grid);
    write_efficiency_csv(out_csv, curve);

    ordered_json extra;
    extra["in"] = labels_file.string();
    extra["images"] = images.size();
    write_meta(out_csv, cfg, "efficiency", extra);
}

EvalReport cmd_eval(const PipelineConfig& cfg, const fs::path& pred_path, const fs::path& gt_path,
                    double iou_threshold, const std::optional<fs::path>& out_json, bool quiet) {
    const std::vector<LabelRecord> pred = read_labels_any(pred_path);
    const std::vector<LabelRecord> gt = read_labels_any(gt_path);
    const EvalReport report = eval_ap(pred, gt, iou_threshold);

    ordered_json j;
    j["iou_threshold"] = iou_threshold;
    ordered_json classes = ordered_json::object();
    for (const auto& ce : report.per_class) {
        ordered_json cj;
        cj["ap"] = ce.ap;
        cj["tp"] = ce.tp;
        cj["fp"] = ce.fp;
        cj["fn"] = ce.fn;
        cj["gt"] = ce.gt_count;
        classes[std::to_string(ce.class_id)] = cj;
    }
    j["classes"] = classes;
    j["map"] = report.map;
    ordered_json counts;
    counts["tp"] = report.tp;
    counts["fp"] = report.fp;
    counts["fn"] = report.fn;
    j["counts"] = counts;
    j["seed"] = cfg.seed;
    j["config"] = config_to_json(cfg);

    if (out_json) write_json_file(*out_json, j);
    if (!quiet) {
        for (const auto& ce : report.per_class) {
            std::cout << "class " << ce.class_id << ": AP " << format_double(ce.ap) << " (tp "
                      << ce.tp << ", fp " << ce.fp << ", fn " << ce.fn << ")\n";
        }
        std::cout << "mAP " << format_double(report.map) << "\n";
    }
    return report;
}

FitResult cmd_analyze(const fs::path& pairs_csv, const std::optional<fs::path>& out_json,
                      bool quiet) {
    std::vector<double> xs;
    std::vector<double> ys;
    read_pairs_csv(pairs_csv, xs, ys);
    const FitResult fit = paired_series_fit(xs, ys);

    ordered_json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["r"] = fit.r;
    j["n"] = fit.n;
    if (out_json) {
        write_json_file(*out_json, j);
        ordered_json meta;
        meta["command"] = "analyze";
        meta["pairs"] = pairs_csv.string();
        write_json_file(fs::path(out_json->string() + ".meta.json"), meta);
    }
    if (!quiet) std::cout << j.dump() << "\n";
    return fit;
}

std::vector<double> parse_fraction_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.empty()) {
        for (int i = 1; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
        return grid;
    }
    const auto parse_one = [&](const std::string& tok) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw UsageError("bad fraction grid value: \"" + tok + "\"");
        }
    };

    if (text.find(':') != std::string::npos) {
        // start:stop:step
        const std::size_t c1 = text.find(':');
        const std::size_t c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos) throw UsageError("grid must be start:stop:step");
        const double start = parse_one(text.substr(0, c1));
        const double stop = parse_one(text.substr(c1 + 1, c2 - c1 - 1));
        const double step = parse_one(text.substr(c2 + 1));
        if (step <= 0.0 || start <= 0.0 || stop < start) throw UsageError("bad grid range");
        for (int i = 0;; ++i) {
            double f = start + step * static_cast<double>(i);
            if (f > stop + 1e-9) break;
            grid.push_back(std::min(f, stop));
        }
    } else {
        std::size_t begin = 0;
        while (begin <= text.size()) {
            const std::size_t end = std::min(text.find(',', begin), text.size());
            grid.push_back(parse_one(text.substr(begin, end - begin)));
            begin = end + 1;
        }
    }
    if (grid.empty()) throw UsageError("empty fraction grid");
    return grid;
}

}  // namespace nearfar
