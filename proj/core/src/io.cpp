#include "tabal/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tabal/error.hpp"

namespace tabal {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- emitting

std::string fmt_double(double v) {
    if (!std::isfinite(v)) throw io_error("cannot serialize non-finite number");
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

std::string box_to_json(const BoundingBox& b) {
    return "[" + fmt_double(b.x_min) + "," + fmt_double(b.y_min) + "," + fmt_double(b.x_max) +
           "," + fmt_double(b.y_max) + "]";
}

// Per-row run-length encoding: alternating run lengths starting with zeros;
// the first run may be 0, all later runs are positive, runs sum to width.
std::string mask_to_json(const BinaryMask& m) {
    std::string out = "{\"width\":" + std::to_string(m.width()) +
                      ",\"height\":" + std::to_string(m.height()) + ",\"rows\":[";
    for (int y = 0; y < m.height(); ++y) {
        if (y) out += ',';
        out += '[';
        bool run_value = false;
        int run_len = 0;
        bool first = true;
        for (int x = 0; x < m.width(); ++x) {
            if (m.test(x, y) == run_value) {
                ++run_len;
            } else {
                if (!first) out += ',';
                out += std::to_string(run_len);
                first = false;
                run_value = !run_value;
                run_len = 1;
            }
        }
        if (!first) out += ',';
        out += std::to_string(run_len);
        out += ']';
    }
    out += "]}";
    return out;
}

// ----------------------------------------------------------------- parsing

[[noreturn]] void fail(size_t line_no, const std::string& what) {
    throw io_error("line " + std::to_string(line_no) + ": " + what);
}

json parse_line(const std::string& line, size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(line_no, "malformed record");
    if (!j.is_object()) fail(line_no, "record is not an object");
    return j;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, size_t line_no) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) fail(line_no, "unknown key \"" + item.key() + "\"");
    }
}

const json& require(const json& j, const char* key, size_t line_no) {
    const auto it = j.find(key);
    if (it == j.end()) fail(line_no, std::string("missing key \"") + key + "\"");
    return *it;
}

double as_double(const json& j, const char* key, size_t line_no) {
    if (!j.is_number()) fail(line_no, std::string("\"") + key + "\" must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(line_no, std::string("\"") + key + "\" must be finite");
    return v;
}

int as_int(const json& j, const char* key, size_t line_no) {
    if (!j.is_number_integer()) fail(line_no, std::string("\"") + key + "\" must be an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const char* key, size_t line_no) {
    if (!j.is_string()) fail(line_no, std::string("\"") + key + "\" must be a string");
    return j.get<std::string>();
}

bool as_bool(const json& j, const char* key, size_t line_no) {
    if (!j.is_boolean()) fail(line_no, std::string("\"") + key + "\" must be a boolean");
    return j.get<bool>();
}

BoundingBox as_box(const json& j, size_t line_no) {
    if (!j.is_array() || j.size() != 4) fail(line_no, "box must be an array of 4 numbers");
    BoundingBox b;
    b.x_min = as_double(j[0], "box", line_no);
    b.y_min = as_double(j[1], "box", line_no);
    b.x_max = as_double(j[2], "box", line_no);
    b.y_max = as_double(j[3], "box", line_no);
    if (!b.valid()) fail(line_no, "invalid box (min must not exceed max)");
    return b;
}

BinaryMask as_mask(const json& j, size_t line_no) {
    check_keys(j, {"width", "height", "rows"}, line_no);
    const int w = as_int(require(j, "width", line_no), "width", line_no);
    const int h = as_int(require(j, "height", line_no), "height", line_no);
    if (w <= 0 || h <= 0) fail(line_no, "mask dimensions must be positive");
    const json& rows = require(j, "rows", line_no);
    if (!rows.is_array() || static_cast<int>(rows.size()) != h) {
        fail(line_no, "mask rows must be an array of height entries");
    }
    BinaryMask mask(w, h);
    for (int y = 0; y < h; ++y) {
        const json& row = rows[y];
        if (!row.is_array() || row.empty()) fail(line_no, "mask row must be a nonempty array");
        int x = 0;
        bool value = false;
        for (size_t i = 0; i < row.size(); ++i) {
            const int run = as_int(row[i], "rows", line_no);
            if (run < 0 || (run == 0 && i != 0)) fail(line_no, "invalid run length in mask row");
            if (x + run > w) fail(line_no, "mask row runs exceed width");
            if (value) {
                for (int k = 0; k < run; ++k) mask.set(x + k, y);
            }
            x += run;
            value = !value;
        }
        if (x != w) fail(line_no, "mask row runs must sum to width");
    }
    return mask;
}

// Reads a whole file and splits it into lines, distinguishing a truncated
// final line (no trailing newline) from malformed content.
std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string content = ss.str();
    if (!content.empty() && content.back() != '\n') {
        throw io_error(path.string() + ": truncated file (missing final newline)");
    }
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < content.size()) {
        const size_t end = content.find('\n', start);
        lines.push_back(content.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw io_error("write failed: " + path.string());
}

class UniqueIds {
public:
    void check(const std::string& id, size_t line_no) {
        if (id.empty()) fail(line_no, "empty image_id");
        if (!seen_.insert(id).second) fail(line_no, "duplicate image_id \"" + id + "\"");
    }

private:
    std::set<std::string> seen_;
};

}  // namespace

double default_t_iou(CorpusProfile profile) {
    return profile == CorpusProfile::word_like ? 0.006 : 0.004;
}

std::string to_string(LoopMode m) {
    return m == LoopMode::static_once ? "static" : "rescore";
}
std::string to_string(TrainingMode m) {
    return m == TrainingMode::warm_start ? "warm" : "cold-literal";
}
std::string to_string(CorpusProfile p) {
    return p == CorpusProfile::latex_like ? "latex-like" : "word-like";
}

LoopMode loop_mode_from_string(const std::string& s) {
    if (s == "static") return LoopMode::static_once;
    if (s == "rescore") return LoopMode::rescore;
    throw config_error("unknown mode \"" + s + "\" (expected static|rescore)");
}
TrainingMode training_mode_from_string(const std::string& s) {
    if (s == "warm") return TrainingMode::warm_start;
    if (s == "cold-literal") return TrainingMode::literal_cold;
    throw config_error("unknown training mode \"" + s + "\" (expected warm|cold-literal)");
}
CorpusProfile profile_from_string(const std::string& s) {
    if (s == "latex-like") return CorpusProfile::latex_like;
    if (s == "word-like") return CorpusProfile::word_like;
    throw config_error("unknown profile \"" + s + "\" (expected latex-like|word-like)");
}

// ------------------------------------------------------------------ dataset

std::string dataset_to_string(const Dataset& dataset) {
    std::string out;
    for (const auto& rec : dataset) {
        out += "{\"image_id\":" + json_escape(rec.image_id) +
               ",\"width\":" + std::to_string(rec.width) +
               ",\"height\":" + std::to_string(rec.height) + ",\"gt_boxes\":[";
        for (size_t i = 0; i < rec.gt_boxes.size(); ++i) {
            if (i) out += ',';
            out += box_to_json(rec.gt_boxes[i]);
        }
        out += ']';
        if (rec.hardness) {
            out += ",\"hardness\":{\"style_cluster\":" + std::to_string(rec.hardness->style_cluster) +
                   ",\"overlap_prone\":" + (rec.hardness->overlap_prone ? "true" : "false") +
                   ",\"table_count\":" + std::to_string(rec.hardness->table_count) + "}";
        }
        out += "}\n";
    }
    return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    write_file(path, dataset_to_string(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) {
    Dataset dataset;
    UniqueIds ids;
    const auto lines = read_lines(path);
    for (size_t n = 0; n < lines.size(); ++n) {
        const size_t line_no = n + 1;
        const json j = parse_line(lines[n], line_no);
        check_keys(j, {"image_id", "width", "height", "gt_boxes", "hardness"}, line_no);
        DatasetRecord rec;
        rec.image_id = as_string(require(j, "image_id", line_no), "image_id", line_no);
        ids.check(rec.image_id, line_no);
        rec.width = as_int(require(j, "width", line_no), "width", line_no);
        rec.height = as_int(require(j, "height", line_no), "height", line_no);
        if (rec.width <= 0 || rec.height <= 0) fail(line_no, "image dimensions must be positive");
        const json& boxes = require(j, "gt_boxes", line_no);
        if (!boxes.is_array()) fail(line_no, "\"gt_boxes\" must be an array");
        for (const auto& b : boxes) rec.gt_boxes.push_back(as_box(b, line_no));
        if (const auto it = j.find("hardness"); it != j.end()) {
            check_keys(*it, {"style_cluster", "overlap_prone", "table_count"}, line_no);
            Hardness h;
            h.style_cluster =
                as_int(require(*it, "style_cluster", line_no), "style_cluster", line_no);
            h.overlap_prone =
                as_bool(require(*it, "overlap_prone", line_no), "overlap_prone", line_no);
            h.table_count = as_int(require(*it, "table_count", line_no), "table_count", line_no);
            if (h.style_cluster < 0) fail(line_no, "style_cluster must be non-negative");
            if (h.table_count != static_cast<int>(rec.gt_boxes.size())) {
                fail(line_no, "hardness table_count does not match gt_boxes");
            }
            rec.hardness = h;
        }
        dataset.push_back(std::move(rec));
    }
    return dataset;
}

// -------------------------------------------------------------- predictions

std::string predictions_to_string(const std::vector<PredictionRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        out += "{\"image_id\":" + json_escape(rec.image_id) +
               ",\"width\":" + std::to_string(rec.image_width) +
               ",\"height\":" + std::to_string(rec.image_height) + ",\"detections\":[";
        for (size_t i = 0; i < rec.detections.size(); ++i) {
            if (i) out += ',';
            out += "{\"box\":" + box_to_json(rec.detections[i].box) +
                   ",\"confidence\":" + fmt_double(rec.detections[i].confidence) + "}";
        }
        out += ']';
        if (rec.segmentation_mask) {
            out += ",\"mask\":" + mask_to_json(*rec.segmentation_mask);
        }
        out += "}\n";
    }
    return out;
}

void write_predictions(const std::vector<PredictionRecord>& records,
                       const std::filesystem::path& path) {
    write_file(path, predictions_to_string(records));
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
    std::vector<PredictionRecord> records;
    UniqueIds ids;
    const auto lines = read_lines(path);
    for (size_t n = 0; n < lines.size(); ++n) {
        const size_t line_no = n + 1;
        const json j = parse_line(lines[n], line_no);
        check_keys(j, {"image_id", "width", "height", "detections", "mask"}, line_no);
        PredictionRecord rec;
        rec.image_id = as_string(require(j, "image_id", line_no), "image_id", line_no);
        ids.check(rec.image_id, line_no);
        rec.image_width = as_int(require(j, "width", line_no), "width", line_no);
        rec.image_height = as_int(require(j, "height", line_no), "height", line_no);
        if (rec.image_width <= 0 || rec.image_height <= 0) {
            fail(line_no, "image dimensions must be positive");
        }
        const json& dets = require(j, "detections", line_no);
        if (!dets.is_array()) fail(line_no, "\"detections\" must be an array");
        for (const auto& d : dets) {
            check_keys(d, {"box", "confidence"}, line_no);
            Detection det;
            det.box = as_box(require(d, "box", line_no), line_no);
            det.confidence = as_double(require(d, "confidence", line_no), "confidence", line_no);
            if (det.confidence < 0.0 || det.confidence > 1.0) {
                fail(line_no, "confidence outside [0, 1]");
            }
            rec.detections.push_back(det);
        }
        if (const auto it = j.find("mask"); it != j.end()) {
            BinaryMask mask = as_mask(*it, line_no);
            if (mask.width() != rec.image_width || mask.height() != rec.image_height) {
                fail(line_no, "mask dimensions do not match image dimensions");
            }
            rec.segmentation_mask = std::move(mask);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// ------------------------------------------------------------------- scores

std::string scores_to_string(const std::vector<ImageScore>& scores) {
    std::string out;
    for (const auto& s : scores) {
        out += "{\"image_id\":" + json_escape(s.image_id);
        if (s.mean_confidence) out += ",\"mean_confidence\":" + fmt_double(*s.mean_confidence);
        out += ",\"entropy\":" + fmt_double(s.entropy) + ",\"bba\":" + fmt_double(s.bba);
        if (s.ma) out += ",\"ma\":" + fmt_double(*s.ma);
        out += ",\"table_count\":" + std::to_string(s.table_count) + "}\n";
    }
    return out;
}

void write_scores(const std::vector<ImageScore>& scores, const std::filesystem::path& path) {
    write_file(path, scores_to_string(scores));
}

std::vector<ImageScore> read_scores(const std::filesystem::path& path) {
    std::vector<ImageScore> scores;
    UniqueIds ids;
    const auto lines = read_lines(path);
    for (size_t n = 0; n < lines.size(); ++n) {
        const size_t line_no = n + 1;
        const json j = parse_line(lines[n], line_no);
        check_keys(j, {"image_id", "mean_confidence", "entropy", "bba", "ma", "table_count"},
                   line_no);
        ImageScore s;
        s.image_id = as_string(require(j, "image_id", line_no), "image_id", line_no);
        ids.check(s.image_id, line_no);
        if (const auto it = j.find("mean_confidence"); it != j.end()) {
            const double v = as_double(*it, "mean_confidence", line_no);
            if (v < 0.0 || v > 1.0) fail(line_no, "mean_confidence outside [0, 1]");
            s.mean_confidence = v;
        }
        s.entropy = as_double(require(j, "entropy", line_no), "entropy", line_no);
        if (s.entropy < 0.0) fail(line_no, "entropy must be non-negative");
        s.bba = as_double(require(j, "bba", line_no), "bba", line_no);
        if (s.bba < 0.0 || s.bba > 1.0) fail(line_no, "bba outside [0, 1]");
        if (const auto it = j.find("ma"); it != j.end()) {
            const double v = as_double(*it, "ma", line_no);
            if (v < 0.0 || v > 1.0) fail(line_no, "ma outside [0, 1]");
            s.ma = v;
        }
        s.table_count = as_int(require(j, "table_count", line_no), "table_count", line_no);
        if (s.table_count < 0) fail(line_no, "table_count must be non-negative");
        scores.push_back(std::move(s));
    }
    return scores;
}

// --------------------------------------------------------------- candidates

std::string candidates_to_string(const CandidateList& list) {
    std::string out = "{\"strategy\":" + json_escape(to_string(list.strategy)) +
                      ",\"seed\":" + std::to_string(list.seed) + "}\n";
    for (const auto& e : list.entries) {
        out += "{\"image_id\":" + json_escape(e.image_id) + ",\"weight\":" + fmt_double(e.weight) +
               "}\n";
    }
    return out;
}

void write_candidates(const CandidateList& list, const std::filesystem::path& path) {
    write_file(path, candidates_to_string(list));
}

CandidateList read_candidates(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw io_error(path.string() + ": missing candidate header line");
    CandidateList list;
    {
        const json j = parse_line(lines[0], 1);
        check_keys(j, {"strategy", "seed"}, 1);
        list.strategy = strategy_from_string(as_string(require(j, "strategy", 1), "strategy", 1));
        const json& seed = require(j, "seed", 1);
        if (!seed.is_number_unsigned() && !seed.is_number_integer()) fail(1, "\"seed\" must be an integer");
        list.seed = seed.get<uint64_t>();
    }
    UniqueIds ids;
    for (size_t n = 1; n < lines.size(); ++n) {
        const size_t line_no = n + 1;
        const json j = parse_line(lines[n], line_no);
        check_keys(j, {"image_id", "weight"}, line_no);
        CandidateEntry e;
        e.image_id = as_string(require(j, "image_id", line_no), "image_id", line_no);
        ids.check(e.image_id, line_no);
        e.weight = as_double(require(j, "weight", line_no), "weight", line_no);
        if (e.weight < 0.0) fail(line_no, "weight must be non-negative");
        list.entries.push_back(std::move(e));
    }
    return list;
}

// ---------------------------------------------------------------- round log

namespace {

std::string threshold_key(double t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", t);
    return buf;
}

std::string report_to_json(const EvalReport& r) {
    std::string out = "{\"map_50\":" + fmt_double(r.map_50) +
                      ",\"map_coco\":" + fmt_double(r.map_coco) + ",\"ap_per_threshold\":{";
    std::string prev_key;
    for (size_t i = 0; i < r.ap_per_threshold.size(); ++i) {
        const std::string key = threshold_key(r.ap_per_threshold[i].first);
        if (key == prev_key) {
            throw io_error("thresholds " + key + " collide at 2-decimal precision");
        }
        prev_key = key;
        if (i) out += ',';
        out += json_escape(key) + ":" + fmt_double(r.ap_per_threshold[i].second);
    }
    out += "},\"counts\":{\"matched\":" + std::to_string(r.counts.matched) +
           ",\"false_positives\":" + std::to_string(r.counts.false_positives) +
           ",\"false_negatives\":" + std::to_string(r.counts.false_negatives) + "}}";
    return out;
}

EvalReport report_from_json(const json& j, size_t line_no) {
    check_keys(j, {"map_50", "map_coco", "ap_per_threshold", "counts"}, line_no);
    EvalReport r;
    r.map_50 = as_double(require(j, "map_50", line_no), "map_50", line_no);
    r.map_coco = as_double(require(j, "map_coco", line_no), "map_coco", line_no);
    const json& aps = require(j, "ap_per_threshold", line_no);
    if (!aps.is_object()) fail(line_no, "\"ap_per_threshold\" must be an object");
    for (const auto& item : aps.items()) {
        r.ap_per_threshold.emplace_back(std::stod(item.key()),
                                        as_double(item.value(), "ap", line_no));
    }
    std::sort(r.ap_per_threshold.begin(), r.ap_per_threshold.end());
    const json& counts = require(j, "counts", line_no);
    check_keys(counts, {"matched", "false_positives", "false_negatives"}, line_no);
    r.counts.matched = as_int(require(counts, "matched", line_no), "matched", line_no);
    r.counts.false_positives =
        as_int(require(counts, "false_positives", line_no), "false_positives", line_no);
    r.counts.false_negatives =
        as_int(require(counts, "false_negatives", line_no), "false_negatives", line_no);
    return r;
}

}  // namespace

std::string report_to_string(const EvalReport& report) {
    return report_to_json(report) + "\n";
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    write_file(path, report_to_string(report));
}

EvalReport read_report(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.size() != 1) throw io_error(path.string() + ": report must be a single line");
    return report_from_json(parse_line(lines[0], 1), 1);
}

std::string round_to_string(const SelectionRound& round) {
    std::string out = "{\"round_index\":" + std::to_string(round.round_index) +
                      ",\"strategy\":" + json_escape(to_string(round.strategy)) +
                      ",\"picked_ids\":[";
    for (size_t i = 0; i < round.picked_ids.size(); ++i) {
        if (i) out += ',';
        out += json_escape(round.picked_ids[i]);
    }
    out += "],\"cumulative_labeled\":" + std::to_string(round.cumulative_labeled) +
           ",\"metrics\":" + report_to_json(round.metrics) + "}\n";
    return out;
}

void append_round_log(const SelectionRound& round, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw io_error("cannot open " + path.string() + " for append");
    out << round_to_string(round);
    if (!out) throw io_error("write failed: " + path.string());
}

std::vector<SelectionRound> read_round_log(const std::filesystem::path& path) {
    std::vector<SelectionRound> rounds;
    const auto lines = read_lines(path);
    for (size_t n = 0; n < lines.size(); ++n) {
        const size_t line_no = n + 1;
        const json j = parse_line(lines[n], line_no);
        check_keys(j, {"round_index", "strategy", "picked_ids", "cumulative_labeled", "metrics"},
                   line_no);
        SelectionRound r;
        r.round_index = as_int(require(j, "round_index", line_no), "round_index", line_no);
        r.strategy =
            strategy_from_string(as_string(require(j, "strategy", line_no), "strategy", line_no));
        const json& ids = require(j, "picked_ids", line_no);
        if (!ids.is_array()) fail(line_no, "\"picked_ids\" must be an array");
        for (const auto& id : ids) r.picked_ids.push_back(as_string(id, "picked_ids", line_no));
        r.cumulative_labeled =
            as_int(require(j, "cumulative_labeled", line_no), "cumulative_labeled", line_no);
        r.metrics = report_from_json(require(j, "metrics", line_no), line_no);
        rounds.push_back(std::move(r));
    }
    return rounds;
}

// ------------------------------------------------------------------- config

std::string config_to_string(const RunConfig& c) {
    std::string out = "{\"strategy\":" + json_escape(to_string(c.strategy)) + ",\"edges\":[";
    for (size_t i = 0; i < c.edges.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(c.edges[i]);
    }
    out += "],\"r_min\":" + fmt_double(c.r_min) +
           ",\"uncertainty_threshold\":" + fmt_double(c.uncertainty_threshold) +
           ",\"t_iou\":" + fmt_double(c.t_iou) + ",\"conf_floor\":" + fmt_double(c.conf_floor) +
           ",\"budget\":{\"K\":" + std::to_string(c.budget.initial_size) +
           ",\"B\":" + std::to_string(c.budget.total) + ",\"k\":" + std::to_string(c.budget.step) +
           ",\"epsilon\":" + std::to_string(c.budget.start) +
           "},\"mode\":" + json_escape(to_string(c.mode)) +
           ",\"training\":" + json_escape(to_string(c.training)) +
           ",\"seed\":" + std::to_string(c.seed) + ",\"eval_thresholds\":[";
    for (size_t i = 0; i < c.eval_thresholds.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(c.eval_thresholds[i]);
    }
    out += "],\"sim\":{\"profile\":" + json_escape(to_string(c.sim.profile)) +
           ",\"m0\":" + fmt_double(c.sim.m0) + ",\"jitter_scale\":" + fmt_double(c.sim.jitter_scale) +
           ",\"conf_noise\":" + fmt_double(c.sim.conf_noise) +
           ",\"dup_conf_factor\":" + fmt_double(c.sim.dup_conf_factor) +
           ",\"emit_masks\":" + (c.sim.emit_masks ? std::string("true") : std::string("false")) +
           "}}\n";
    return out;
}

void write_config(const RunConfig& config, const std::filesystem::path& path) {
    write_file(path, config_to_string(config));
}

RunConfig read_config(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.size() != 1) throw io_error(path.string() + ": config must be a single line");
    const json j = parse_line(lines[0], 1);
    check_keys(j,
               {"strategy", "edges", "r_min", "uncertainty_threshold", "t_iou", "conf_floor",
                "budget", "mode", "training", "seed", "eval_thresholds", "sim"},
               1);
    RunConfig c;
    c.strategy = strategy_from_string(as_string(require(j, "strategy", 1), "strategy", 1));
    const json& edges = require(j, "edges", 1);
    if (!edges.is_array()) fail(1, "\"edges\" must be an array");
    c.edges.clear();
    for (const auto& e : edges) c.edges.push_back(as_double(e, "edges", 1));
    c.r_min = as_double(require(j, "r_min", 1), "r_min", 1);
    c.uncertainty_threshold =
        as_double(require(j, "uncertainty_threshold", 1), "uncertainty_threshold", 1);
    c.t_iou = as_double(require(j, "t_iou", 1), "t_iou", 1);
    c.conf_floor = as_double(require(j, "conf_floor", 1), "conf_floor", 1);
    const json& b = require(j, "budget", 1);
    check_keys(b, {"K", "B", "k", "epsilon"}, 1);
    c.budget.initial_size = as_int(require(b, "K", 1), "K", 1);
    c.budget.total = as_int(require(b, "B", 1), "B", 1);
    c.budget.step = as_int(require(b, "k", 1), "k", 1);
    c.budget.start = as_int(require(b, "epsilon", 1), "epsilon", 1);
    c.mode = loop_mode_from_string(as_string(require(j, "mode", 1), "mode", 1));
    c.training = training_mode_from_string(as_string(require(j, "training", 1), "training", 1));
    const json& seed = require(j, "seed", 1);
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) fail(1, "\"seed\" must be an integer");
    c.seed = seed.get<uint64_t>();
    const json& ts = require(j, "eval_thresholds", 1);
    if (!ts.is_array()) fail(1, "\"eval_thresholds\" must be an array");
    c.eval_thresholds.clear();
    for (const auto& t : ts) c.eval_thresholds.push_back(as_double(t, "eval_thresholds", 1));
    const json& sim = require(j, "sim", 1);
    check_keys(sim, {"profile", "m0", "jitter_scale", "conf_noise", "dup_conf_factor", "emit_masks"},
               1);
    c.sim.profile = profile_from_string(as_string(require(sim, "profile", 1), "profile", 1));
    c.sim.m0 = as_double(require(sim, "m0", 1), "m0", 1);
    c.sim.jitter_scale = as_double(require(sim, "jitter_scale", 1), "jitter_scale", 1);
    c.sim.conf_noise = as_double(require(sim, "conf_noise", 1), "conf_noise", 1);
    c.sim.dup_conf_factor = as_double(require(sim, "dup_conf_factor", 1), "dup_conf_factor", 1);
    c.sim.emit_masks = as_bool(require(sim, "emit_masks", 1), "emit_masks", 1);
    return c;
}

}  // namespace tabal
