#include "muted/interchange.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "muted/attention.hpp"
#include "muted/error.hpp"
#include "muted/utf8.hpp"

namespace muted {

namespace {

std::string at(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

std::string idx(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(at(path, key), "missing required field");
    return *it;
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ValidationError(path, "expected an integer");
    const auto x = v.get<long long>();
    if (x < -2147483648LL || x > 2147483647LL) throw ValidationError(path, "integer out of range");
    return static_cast<int>(x);
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError(path, "expected a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ValidationError(path, "expected a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ValidationError(path, "expected a boolean");
    return v.get<bool>();
}

const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path, "expected an array");
    return v;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::size_t text_length(const std::string& text, const std::string& path) {
    try {
        return utf8::length(text);
    } catch (const ValidationError& e) {
        throw ValidationError(path, e.message());
    }
}

const std::set<std::string> kRecordFields = {
    "schema_version", "id",          "text",       "language",          "tokens",
    "head_cls_rows",  "layer_index", "parse",      "classifier_label",  "classifier_score",
};

}  // namespace

// --- records ---------------------------------------------------------------

void validate_record(const AttentionRecord& r) {
    const auto length = text_length(r.text, "text");
    if (r.language.empty()) throw ValidationError("language", "must not be empty");

    std::set<int> words;
    int prev_end = 0;
    int prev_word = -1;
    std::size_t prev_index = 0;
    bool have_prev = false;
    for (std::size_t i = 0; i < r.tokens.size(); ++i) {
        const auto& t = r.tokens[i];
        const std::string p = idx("tokens", i);
        if (t.special != (t.word_index == -1)) {
            throw ValidationError(at(p, "word_index"),
                                  t.special ? "special token must have word_index -1"
                                            : "non-special token needs word_index >= 0");
        }
        if (t.special) {
            if (t.start != 0 || t.end != 0) {
                throw ValidationError(p, "special token must have empty offsets (0, 0)");
            }
            continue;
        }
        if (t.word_index < 0) throw ValidationError(at(p, "word_index"), "must be >= 0");
        if (t.start < 0) throw ValidationError(at(p, "start"), "negative offset");
        if (t.start > t.end) throw ValidationError(at(p, "end"), "end precedes start");
        if (static_cast<std::size_t>(t.end) > length) {
            throw ValidationError(at(p, "end"), "exceeds text length " + std::to_string(length));
        }
        if (have_prev) {
            if (t.start < prev_end) {
                throw ValidationError(p, "offsets [" + std::to_string(t.start) + "," +
                                             std::to_string(t.end) + ") overlap " +
                                             idx("tokens", prev_index));
            }
            if (t.word_index < prev_word) {
                throw ValidationError(at(p, "word_index"),
                                      "word indices must not decrease along the text");
            }
        }
        prev_end = t.end;
        prev_word = t.word_index;
        prev_index = i;
        have_prev = true;
        words.insert(t.word_index);
    }
    const int word_total = static_cast<int>(words.size());
    if (!words.empty() && *words.rbegin() != word_total - 1) {
        throw ValidationError("tokens", "word_index values must be contiguous from 0");
    }

    if (r.head_cls_rows.empty()) {
        throw ValidationError("head_cls_rows", "need at least one head row");
    }
    for (std::size_t h = 0; h < r.head_cls_rows.size(); ++h) {
        const auto& row = r.head_cls_rows[h];
        const std::string p = idx("head_cls_rows", h);
        if (row.size() != r.tokens.size()) {
            throw ValidationError(p, "row has " + std::to_string(row.size()) +
                                         " entries, expected one per token (" +
                                         std::to_string(r.tokens.size()) + ")");
        }
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!std::isfinite(row[j])) throw ValidationError(idx(p, j), "non-finite attention");
            if (row[j] < 0.0) throw ValidationError(idx(p, j), "negative attention");
        }
    }

    if (!(r.classifier_score >= 0.0 && r.classifier_score <= 1.0)) {
        throw ValidationError("classifier_score", "must lie in [0, 1]");
    }

    if (r.parse) {
        std::set<int> covered;
        for (std::size_t i = 0; i < r.parse->size(); ++i) {
            const auto& arc = (*r.parse)[i];
            const std::string p = idx("parse", i);
            if (arc.word_index < 0 || arc.word_index >= word_total) {
                throw ValidationError(at(p, "word_index"), "not a word of this record");
            }
            if (arc.head < 0 || arc.head >= word_total) {
                throw ValidationError(at(p, "head"), "not a word of this record");
            }
            if (arc.label.empty()) throw ValidationError(at(p, "label"), "must not be empty");
            if (!covered.insert(arc.word_index).second) {
                throw ValidationError(at(p, "word_index"), "duplicate arc for word " +
                                                               std::to_string(arc.word_index));
            }
        }
    }
}

AttentionRecord record_from_json(const json& j, bool strict) {
    if (!j.is_object()) throw ValidationError("", "record must be a JSON object");
    if (strict) {
        for (const auto& [key, _] : j.items()) {
            if (!kRecordFields.contains(key)) throw ValidationError(key, "unknown field");
        }
    }
    const int version = as_int(require(j, "schema_version", ""), "schema_version");
    if (version != kSchemaVersion) {
        throw ValidationError("schema_version", "unsupported version " + std::to_string(version));
    }

    AttentionRecord r;
    if (auto it = j.find("id"); it != j.end() && !it->is_null()) r.id = as_string(*it, "id");
    r.text = as_string(require(j, "text", ""), "text");
    r.language = as_string(require(j, "language", ""), "language");
    r.layer_index = as_int(require(j, "layer_index", ""), "layer_index");

    const auto label = as_string(require(j, "classifier_label", ""), "classifier_label");
    if (label == "hap") {
        r.classifier_label = ClassifierLabel::hap;
    } else if (label == "clean") {
        r.classifier_label = ClassifierLabel::clean;
    } else {
        throw ValidationError("classifier_label", "expected \"hap\" or \"clean\"");
    }
    r.classifier_score = as_number(require(j, "classifier_score", ""), "classifier_score");

    const auto& tokens = as_array(require(j, "tokens", ""), "tokens");
    r.tokens.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string p = idx("tokens", i);
        const auto& t = tokens[i];
        if (!t.is_object()) throw ValidationError(p, "expected an object");
        TokenInfo info;
        info.text = as_string(require(t, "text", p), at(p, "text"));
        info.start = as_int(require(t, "start", p), at(p, "start"));
        info.end = as_int(require(t, "end", p), at(p, "end"));
        info.word_index = as_int(require(t, "word_index", p), at(p, "word_index"));
        info.special = as_bool(require(t, "special", p), at(p, "special"));
        r.tokens.push_back(std::move(info));
    }

    const auto& rows = as_array(require(j, "head_cls_rows", ""), "head_cls_rows");
    r.head_cls_rows.reserve(rows.size());
    for (std::size_t h = 0; h < rows.size(); ++h) {
        const std::string p = idx("head_cls_rows", h);
        const auto& row = as_array(rows[h], p);
        std::vector<double> values;
        values.reserve(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) values.push_back(as_number(row[k], idx(p, k)));
        r.head_cls_rows.push_back(std::move(values));
    }

    if (auto it = j.find("parse"); it != j.end() && !it->is_null()) {
        const auto& arcs = as_array(*it, "parse");
        std::vector<ParseArc> parse;
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            const std::string p = idx("parse", i);
            const auto& a = arcs[i];
            if (!a.is_object()) throw ValidationError(p, "expected an object");
            ParseArc arc;
            arc.word_index = as_int(require(a, "word_index", p), at(p, "word_index"));
            arc.head = as_int(require(a, "head", p), at(p, "head"));
            arc.label = lower(as_string(require(a, "label", p), at(p, "label")));
            if (auto pos = a.find("pos"); pos != a.end()) arc.pos = as_string(*pos, at(p, "pos"));
            parse.push_back(std::move(arc));
        }
        r.parse = std::move(parse);
    }

    validate_record(r);
    return r;
}

AttentionRecord parse_attention_record(std::string_view bytes, bool strict) {
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what());
    }
    return record_from_json(j, strict);
}

json record_to_json(const AttentionRecord& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    if (!r.id.empty()) j["id"] = r.id;
    j["text"] = r.text;
    j["language"] = r.language;
    j["layer_index"] = r.layer_index;
    j["classifier_label"] = to_string(r.classifier_label);
    j["classifier_score"] = r.classifier_score;
    j["tokens"] = json::array();
    for (const auto& t : r.tokens) {
        j["tokens"].push_back({{"text", t.text},
                               {"start", t.start},
                               {"end", t.end},
                               {"word_index", t.word_index},
                               {"special", t.special}});
    }
    j["head_cls_rows"] = r.head_cls_rows;
    if (r.parse) {
        j["parse"] = json::array();
        for (const auto& a : *r.parse) {
            j["parse"].push_back(
                {{"word_index", a.word_index}, {"head", a.head}, {"label", a.label}, {"pos", a.pos}});
        }
    }
    return j;
}

std::string serialize_attention_record(const AttentionRecord& record) {
    return record_to_json(record).dump(2) + "\n";
}

std::map<std::string, AttentionRecord> load_records_dir(const std::filesystem::path& dir,
                                                        bool strict) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            const auto name = entry.path().filename().string();
            if (name.ends_with(".expected.json")) continue;
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, AttentionRecord> records;
    for (const auto& f : files) {
        AttentionRecord r;
        try {
            r = parse_attention_record(read_file(f), strict);
        } catch (const ValidationError& e) {
            throw ValidationError(f.filename().string() + (e.path().empty() ? "" : ":" + e.path()),
                                  e.message());
        }
        std::string id = r.id.empty() ? f.stem().string() : r.id;
        if (records.contains(id)) throw ValidationError(f.filename().string(), "duplicate id " + id);
        records.emplace(std::move(id), std::move(r));
    }
    return records;
}

// --- gold --------------------------------------------------------------------

std::optional<DatasetFormat> parse_dataset_format(const std::string& s) {
    if (s == "tsd_csv") return DatasetFormat::tsd_csv;
    if (s == "tbo_jsonl") return DatasetFormat::tbo_jsonl;
    return std::nullopt;
}

namespace {

void check_spans(const std::vector<CharSpan>& spans, std::size_t length, const std::string& path) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto& s = spans[i];
        if (s.start < 0 || s.end <= s.start || static_cast<std::size_t>(s.end) > length) {
            throw ValidationError(idx(path, i), "span [" + std::to_string(s.start) + "," +
                                                    std::to_string(s.end) +
                                                    ") is empty or out of bounds");
        }
    }
}

std::vector<CharSpan> spans_from_json(const json& v, const std::string& path) {
    const auto& arr = as_array(v, path);
    std::vector<CharSpan> spans;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = idx(path, i);
        const auto& pair = as_array(arr[i], p);
        if (pair.size() != 2) throw ValidationError(p, "expected [start, end]");
        spans.push_back({as_int(pair[0], idx(p, 0)), as_int(pair[1], idx(p, 1))});
    }
    return spans;
}

void append_chars(CharSet& out, const std::vector<CharSpan>& spans) {
    for (const auto& s : spans) {
        for (int c = s.start; c < s.end; ++c) out.push_back(c);
    }
}

CharSet finish(CharSet chars) {
    std::sort(chars.begin(), chars.end());
    chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
    return chars;
}

}  // namespace

void validate_gold(const GoldExample& g) {
    if (g.id.empty()) throw ValidationError("id", "must not be empty");
    if (g.gold_char_set.has_value() == g.pairs.has_value()) {
        throw ValidationError("", "exactly one of gold_chars / pairs must be present");
    }
    const auto length = text_length(g.text, "text");
    if (g.gold_char_set) {
        const auto& chars = *g.gold_char_set;
        for (std::size_t i = 0; i < chars.size(); ++i) {
            if (chars[i] < 0 || static_cast<std::size_t>(chars[i]) >= length) {
                throw ValidationError(idx("gold_chars", i), "offset outside the text");
            }
            if (i > 0 && chars[i] <= chars[i - 1]) {
                throw ValidationError(idx("gold_chars", i), "offsets must be sorted and unique");
            }
        }
    }
    if (g.pairs) {
        for (std::size_t i = 0; i < g.pairs->size(); ++i) {
            const auto& pair = (*g.pairs)[i];
            const std::string p = idx("pairs", i);
            if (pair.argument.empty()) throw ValidationError(at(p, "argument"), "must not be empty");
            check_spans(pair.argument, length, at(p, "argument"));
            if (pair.target) {
                if (pair.target->empty()) {
                    throw ValidationError(at(p, "target"), "use null for a missing target");
                }
                check_spans(*pair.target, length, at(p, "target"));
            }
        }
    }
}

GoldExample gold_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("", "expected a JSON object");
    GoldExample g;
    const auto& id = require(j, "id", "");
    if (id.is_number_integer()) {
        g.id = std::to_string(id.get<long long>());
    } else {
        g.id = as_string(id, "id");
    }
    g.text = as_string(require(j, "text", ""), "text");
    if (auto it = j.find("language"); it != j.end()) {
        g.language = as_string(*it, "language");
    } else {
        g.language = "und";
    }
    const bool has_chars = j.contains("gold_chars") && !j["gold_chars"].is_null();
    const bool has_pairs = j.contains("pairs") && !j["pairs"].is_null();
    if (has_chars == has_pairs) {
        throw ValidationError("", "exactly one of gold_chars / pairs must be present");
    }
    if (has_chars) {
        const auto& arr = as_array(j["gold_chars"], "gold_chars");
        CharSet chars;
        for (std::size_t i = 0; i < arr.size(); ++i) chars.push_back(as_int(arr[i], idx("gold_chars", i)));
        g.gold_char_set = finish(std::move(chars));
    } else {
        const auto& arr = as_array(j["pairs"], "pairs");
        std::vector<GoldPair> pairs;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = idx("pairs", i);
            const auto& obj = arr[i];
            if (!obj.is_object()) throw ValidationError(p, "expected an object");
            GoldPair pair;
            const auto& target = require(obj, "target", p);
            if (!target.is_null()) {
                auto spans = spans_from_json(target, at(p, "target"));
                // An empty list is read as "no target in the text".
                if (!spans.empty()) pair.target = std::move(spans);
            }
            pair.argument = spans_from_json(require(obj, "argument", p), at(p, "argument"));
            pairs.push_back(std::move(pair));
        }
        g.pairs = std::move(pairs);
    }
    validate_gold(g);
    return g;
}

json spans_to_json(const std::vector<CharSpan>& spans) {
    json arr = json::array();
    for (const auto& s : spans) arr.push_back({s.start, s.end});
    return arr;
}

json gold_to_json(const GoldExample& g) {
    json j{{"id", g.id}, {"text", g.text}, {"language", g.language}};
    if (g.gold_char_set) j["gold_chars"] = *g.gold_char_set;
    if (g.pairs) {
        j["pairs"] = json::array();
        for (const auto& p : *g.pairs) {
            j["pairs"].push_back({{"target", p.target ? spans_to_json(*p.target) : json(nullptr)},
                                  {"argument", spans_to_json(p.argument)}});
        }
    }
    return j;
}

CharSet gold_target_chars(const GoldExample& g) {
    CharSet chars;
    if (g.pairs) {
        for (const auto& p : *g.pairs) {
            if (p.target) append_chars(chars, *p.target);
        }
    }
    return finish(std::move(chars));
}

CharSet gold_argument_chars(const GoldExample& g) {
    CharSet chars;
    if (g.pairs) {
        for (const auto& p : *g.pairs) append_chars(chars, p.argument);
    }
    return finish(std::move(chars));
}

bool all_targets_null(const GoldExample& g) {
    if (!g.pairs) return true;
    return std::all_of(g.pairs->begin(), g.pairs->end(),
                       [](const GoldPair& p) { return !p.target.has_value(); });
}

namespace {

// RFC 4180 records: quoted fields may contain commas, doubled quotes and
// newlines. Returns each record with the physical line it started on.
struct CsvRecord {
    std::size_t line;
    std::vector<std::string> fields;
};

std::vector<CsvRecord> read_csv(std::string_view content) {
    std::vector<CsvRecord> records;
    CsvRecord current{1, {}};
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = current.fields.size() == 1 && current.fields[0].empty();
        if (!blank) records.push_back(std::move(current));
        current = CsvRecord{line, {}};
    };
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r') {
            // tolerated before \n
        } else if (c == '\n') {
            ++line;
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (!field.empty() || !current.fields.empty() || field_started) end_record();
    return records;
}

GoldDataset parse_tsd_csv(std::string_view content) {
    GoldDataset out;
    auto rows = read_csv(content);
    if (rows.empty()) throw ValidationError("", "empty dataset");
    const auto& header = rows.front().fields;
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    const auto spans_col = column("spans");
    const auto text_col = column("text");
    const auto id_col = column("id");
    if (!spans_col || !text_col) {
        throw ValidationError("header", "TSD CSV needs \"spans\" and \"text\" columns");
    }
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        try {
            if (row.fields.size() != header.size()) {
                throw ValidationError("", "expected " + std::to_string(header.size()) +
                                              " columns, got " + std::to_string(row.fields.size()));
            }
            GoldExample g;
            g.id = id_col ? row.fields[*id_col] : "tsd-" + std::to_string(r - 1);
            g.text = row.fields[*text_col];
            g.language = "en";
            json spans;
            try {
                spans = json::parse(row.fields[*spans_col]);
            } catch (const json::parse_error&) {
                throw ValidationError("spans", "not a JSON integer list");
            }
            const auto& arr = as_array(spans, "spans");
            CharSet chars;
            for (std::size_t i = 0; i < arr.size(); ++i) chars.push_back(as_int(arr[i], idx("spans", i)));
            g.gold_char_set = finish(std::move(chars));
            validate_gold(g);
            if (!seen.insert(g.id).second) throw ValidationError("id", "duplicate id " + g.id);
            out.examples.push_back(std::move(g));
        } catch (const ValidationError& e) {
            out.issues.push_back({row.line, e.what()});
        }
    }
    return out;
}

GoldDataset parse_jsonl(std::string_view content) {
    GoldDataset out;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const auto nl = content.find('\n', pos);
        const auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                           : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            json j;
            try {
                j = json::parse(line.begin(), line.end());
            } catch (const json::parse_error&) {
                throw ValidationError("", "malformed JSON");
            }
            auto g = gold_from_json(j);
            if (!seen.insert(g.id).second) throw ValidationError("id", "duplicate id " + g.id);
            out.examples.push_back(std::move(g));
        } catch (const ValidationError& e) {
            out.issues.push_back({line_no, e.what()});
        }
    }
    return out;
}

}  // namespace

GoldDataset parse_gold_dataset(std::string_view content, DatasetFormat format) {
    auto out = format == DatasetFormat::tsd_csv ? parse_tsd_csv(content) : parse_jsonl(content);
    if (out.examples.empty()) {
        std::string msg = "no parseable rows";
        if (!out.issues.empty()) {
            msg += " (first issue, line " + std::to_string(out.issues.front().line) + ": " +
                   out.issues.front().message + ")";
        }
        throw ValidationError("", msg);
    }
    return out;
}

GoldDataset load_gold_dataset(const std::filesystem::path& path, DatasetFormat format) {
    return parse_gold_dataset(read_file(path), format);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

}  // namespace muted
