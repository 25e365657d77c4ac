#include "nearfar/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nearfar/errors.hpp"
#include "nearfar/rng.hpp"

namespace nearfar {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string loc(const fs::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path.string());
    return out;
}

const ordered_json& require(const ordered_json& j, const char* field, const fs::path& path,
                            std::size_t line) {
    const auto it = j.find(field);
    if (it == j.end()) {
        throw SchemaError(loc(path, line) + ": missing field \"" + field + "\"");
    }
    return *it;
}

double require_number(const ordered_json& j, const char* field, const fs::path& path,
                      std::size_t line) {
    const auto& v = require(j, field, path, line);
    if (!v.is_number()) throw SchemaError(loc(path, line) + ": field \"" + field + "\" must be a number");
    return v.get<double>();
}

std::int64_t require_int(const ordered_json& j, const char* field, const fs::path& path,
                         std::size_t line) {
    const auto& v = require(j, field, path, line);
    if (!v.is_number_integer()) {
        throw SchemaError(loc(path, line) + ": field \"" + field + "\" must be an integer");
    }
    return v.get<std::int64_t>();
}

CornerBox require_bbox(const ordered_json& j, const fs::path& path, std::size_t line) {
    const auto& v = require(j, "bbox", path, line);
    if (!v.is_array() || v.size() != 4 || !std::all_of(v.begin(), v.end(), [](const ordered_json& e) {
            return e.is_number();
        })) {
        throw SchemaError(loc(path, line) + ": field \"bbox\" must be [x1, y1, x2, y2]");
    }
    const CornerBox box{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
                        v[3].get<double>()};
    if (!box.valid()) throw SchemaError(loc(path, line) + ": field \"bbox\" is degenerate");
    return box;
}

ordered_json parse_line(const std::string& text, const fs::path& path, std::size_t line) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw SchemaError(loc(path, line) + ": malformed JSON object");
    }
    return j;
}

double parse_real(const std::string& token, const fs::path& path, std::size_t line,
                  const char* what) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw SchemaError(loc(path, line) + ": " + what + " is not numeric: \"" + token + "\"");
    }
    return value;
}

}  // namespace

ClassMap default_class_map() {
    return ClassMap{{"Car", 0}, {"Pedestrian", 1}, {"Cyclist", 2}};
}

std::map<int, std::string> class_names(const ClassMap& map) {
    std::map<int, std::string> names;
    for (const auto& [token, id] : map) names[id] = token;
    return names;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw NumericError("format_double failed");
    return std::string(buf, ptr);
}

void write_labels(const fs::path& path, const std::vector<LabelRecord>& records) {
    std::ofstream out = open_output(path);
    for (const auto& rec : records) {
        ordered_json j;
        j["seq"] = rec.seq;
        j["frame"] = rec.det.frame_id;
        j["track"] = rec.track_id;
        j["class"] = rec.det.class_id;
        j["bbox"] = {rec.det.box.x1, rec.det.box.y1, rec.det.box.x2, rec.det.box.y2};
        j["score"] = rec.det.score;
        j["loss"] = rec.det.loss;
        j["source"] = to_string(rec.det.source);
        j["saved"] = rec.saved;
        out << j.dump() << '\n';
    }
}

std::vector<LabelRecord> read_labels(const fs::path& path) {
    std::ifstream in = open_input(path);
    std::vector<LabelRecord> records;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        const ordered_json j = parse_line(text, path, line);

        LabelRecord rec;
        const auto& seq = require(j, "seq", path, line);
        if (!seq.is_string()) throw SchemaError(loc(path, line) + ": field \"seq\" must be a string");
        rec.seq = seq.get<std::string>();
        rec.det.frame_id = require_int(j, "frame", path, line);
        rec.track_id = static_cast<int>(require_int(j, "track", path, line));
        rec.det.class_id = static_cast<int>(require_int(j, "class", path, line));
        rec.det.box = require_bbox(j, path, line);
        rec.det.score = require_number(j, "score", path, line);
        rec.det.loss = require_number(j, "loss", path, line);
        const auto& source = require(j, "source", path, line);
        if (!source.is_string()) {
            throw SchemaError(loc(path, line) + ": field \"source\" must be a string");
        }
        rec.det.source = source_from_string(source.get<std::string>());
        const auto& saved = require(j, "saved", path, line);
        if (!saved.is_boolean()) {
            throw SchemaError(loc(path, line) + ": field \"saved\" must be a boolean");
        }
        rec.saved = saved.get<bool>();

        if (rec.det.score < 0.0 || rec.det.score > 1.0 || !std::isfinite(rec.det.score)) {
            throw SchemaError(loc(path, line) + ": field \"score\" must lie in [0, 1]");
        }
        if (rec.det.loss < 0.0 || !std::isfinite(rec.det.loss)) {
            throw SchemaError(loc(path, line) + ": field \"loss\" must be >= 0");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<LabelRecord> gt_to_records(const std::string& seq, const GtMap& gt) {
    std::vector<LabelRecord> records;
    for (const auto& [frame, entries] : gt) {
        for (const auto& entry : entries) {
            LabelRecord rec;
            rec.seq = seq;
            rec.det = Detection{frame, entry.box, entry.class_id, 1.0, 0.0, Source::GroundTruth};
            rec.track_id = entry.object_id;
            rec.saved = true;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::map<std::string, GtMap> records_to_gt(const std::vector<LabelRecord>& records) {
    std::map<std::string, GtMap> out;
    for (const auto& rec : records) {
        out[rec.seq][rec.det.frame_id].push_back(
            GtEntry{rec.track_id, rec.det.class_id, rec.det.box});
    }
    return out;
}

std::vector<LabelRecord> read_labels_any(const fs::path& path) {
    if (!fs::exists(path)) throw UsageError("no such file or directory: " + path.string());
    if (!fs::is_directory(path)) return read_labels(path);

    std::vector<fs::path> files;
    bool has_txt = false;
    for (const auto& entry : fs::directory_iterator(path)) {
        const fs::path& p = entry.path();
        if (p.extension() == ".jsonl") files.push_back(p);
        if (p.extension() == ".txt") has_txt = true;
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        if (has_txt) {
            // KITTI label directory: import with the default class map.
            const KittiReadResult kitti = read_kitti_labels(path, default_class_map());
            return gt_to_records(path.filename().string(), kitti.gt);
        }
        throw UsageError("no .jsonl or .txt label files in " + path.string());
    }

    std::vector<LabelRecord> records;
    for (const auto& file : files) {
        auto part = read_labels(file);
        records.insert(records.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
    }
    return records;
}

FileDetector::Store read_detections(const fs::path& path) {
    std::ifstream in = open_input(path);
    FileDetector::Store store;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        const ordered_json j = parse_line(text, path, line);

        const std::int64_t frame = require_int(j, "frame", path, line);
        FileDetector::Stored s;
        s.class_id = static_cast<int>(require_int(j, "class", path, line));
        s.box = require_bbox(j, path, line);
        s.score = require_number(j, "score", path, line);
        s.loss = require_number(j, "loss", path, line);
        if (s.score < 0.0 || s.score > 1.0 || s.loss < 0.0) {
            throw SchemaError(loc(path, line) + ": score/loss out of range");
        }
        store[frame].push_back(s);
    }
    return store;
}

void write_detections(const fs::path& path, const FileDetector::Store& store) {
    std::ofstream out = open_output(path);
    for (const auto& [frame, dets] : store) {
        for (const auto& d : dets) {
            ordered_json j;
            j["frame"] = frame;
            j["class"] = d.class_id;
            j["bbox"] = {d.box.x1, d.box.y1, d.box.x2, d.box.y2};
            j["score"] = d.score;
            j["loss"] = d.loss;
            out << j.dump() << '\n';
        }
    }
}

KittiReadResult read_kitti_labels(const fs::path& dir, const ClassMap& map) {
    if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    KittiReadResult result;
    for (const auto& file : files) {
        const std::string stem = file.stem().string();
        std::int64_t frame = 0;
        const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), frame);
        if (ec != std::errc() || ptr != stem.data() + stem.size()) {
            throw SchemaError(file.string() + ": file name is not a frame id");
        }

        auto& entries = result.gt[frame];
        std::ifstream in = open_input(file);
        std::string text;
        std::size_t line = 0;
        while (std::getline(in, text)) {
            ++line;
            std::istringstream fields(text);
            std::vector<std::string> tokens;
            std::string tok;
            while (fields >> tok) tokens.push_back(tok);
            if (tokens.empty()) continue;
            if (tokens.size() < 8) {
                throw SchemaError(loc(file, line) + ": expected >= 8 fields, got " +
                                  std::to_string(tokens.size()));
            }
            // Fields 2-4 (truncated, occluded, alpha) must parse even though
            // only the class token and bbox are used.
            parse_real(tokens[1], file, line, "truncated");
            parse_real(tokens[2], file, line, "occluded");
            parse_real(tokens[3], file, line, "alpha");
            const CornerBox box{parse_real(tokens[4], file, line, "bbox x1"),
                                parse_real(tokens[5], file, line, "bbox y1"),
                                parse_real(tokens[6], file, line, "bbox x2"),
                                parse_real(tokens[7], file, line, "bbox y2")};
            if (!box.valid()) throw SchemaError(loc(file, line) + ": degenerate bbox");

            const auto it = map.find(tokens[0]);
            if (it == map.end()) {
                ++result.dropped;
                continue;
            }
            entries.push_back(GtEntry{static_cast<int>(entries.size()), it->second, box});
        }
    }
    return result;
}

void write_kitti_labels(const fs::path& dir, const std::vector<LabelRecord>& records,
                        const std::map<int, std::string>& names) {
    std::map<std::string, std::map<std::int64_t, std::vector<const LabelRecord*>>> grouped;
    for (const auto& rec : records) grouped[rec.seq][rec.det.frame_id].push_back(&rec);

    for (const auto& [seq, frames] : grouped) {
        const fs::path seq_dir = dir / seq;
        fs::create_directories(seq_dir);
        for (const auto& [frame, recs] : frames) {
            char name[32];
            std::snprintf(name, sizeof(name), "%06lld.txt", static_cast<long long>(frame));
            std::ofstream out = open_output(seq_dir / name);
            for (const LabelRecord* rec : recs) {
                const auto it = names.find(rec->det.class_id);
                const std::string& token =
                    it == names.end() ? std::string("DontCare") : it->second;
                out << token << " -1 -1 -10 " << format_double(rec->det.box.x1) << ' '
                    << format_double(rec->det.box.y1) << ' ' << format_double(rec->det.box.x2)
                    << ' ' << format_double(rec->det.box.y2)
                    << " -1 -1 -1 -1000 -1000 -1000 -10 " << format_double(rec->det.score)
                    << '\n';
            }
        }
    }
}

void write_efficiency_csv(const fs::path& path, const std::vector<EfficiencyPoint>& curve) {
    std::ofstream out = open_output(path);
    out << "fraction,M,R\n";
    for (const auto& point : curve) {
        out << format_double(point.fraction) << ',' << point.m << ',' << format_double(point.r)
            << '\n';
    }
}

void read_pairs_csv(const fs::path& path, std::vector<double>& xs, std::vector<double>& ys) {
    std::ifstream in = open_input(path);
    xs.clear();
    ys.clear();
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.empty()) continue;
        const std::size_t comma = text.find(',');
        if (comma == std::string::npos) {
            throw SchemaError(loc(path, line) + ": expected two comma-separated columns");
        }
        const std::string a = text.substr(0, comma);
        const std::string b = text.substr(comma + 1);
        double x = 0.0;
        const auto [pa, ea] = std::from_chars(a.data(), a.data() + a.size(), x);
        if (line == 1 && (ea != std::errc() || pa != a.data() + a.size())) {
            continue;  // header row
        }
        xs.push_back(parse_real(a, path, line, "x"));
        ys.push_back(parse_real(b, path, line, "y"));
    }
}

void write_json_file(const fs::path& path, const ordered_json& j) {
    std::ofstream out = open_output(path);
    out << j.dump(2) << '\n';
}

ordered_json read_json_file(const fs::path& path) {
    std::ifstream in = open_input(path);
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path.string() + ": malformed JSON");
    return j;
}

FrameSplit split_frames(std::vector<std::int64_t> frames, std::int64_t n_train, std::int64_t n_val,
                        std::int64_t n_test, std::uint64_t seed) {
    if (n_train < 0 || n_val < 0 || n_test < 0 ||
        static_cast<std::size_t>(n_train + n_val + n_test) > frames.size()) {
        throw std::invalid_argument("split_frames: counts exceed the frame list");
    }
    std::sort(frames.begin(), frames.end());
    Rng rng(seed);
    for (std::size_t i = frames.size(); i > 1; --i) {
        std::swap(frames[i - 1], frames[static_cast<std::size_t>(rng.below(i))]);
    }
    FrameSplit split;
    auto take = [&frames](std::int64_t offset, std::int64_t count) {
        std::vector<std::int64_t> out(frames.begin() + offset, frames.begin() + offset + count);
        std::sort(out.begin(), out.end());
        return out;
    };
    split.train = take(0, n_train);
    split.val = take(n_train, n_val);
    split.test = take(n_train + n_val, n_test);
    return split;
}

}  // namespace nearfar
