#include "cssplc/results_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <system_error>

#include "cssplc/analysis.hpp"
#include "cssplc/config.hpp"
#include "cssplc/errors.hpp"

namespace cssplc {

using nlohmann::json;

namespace {

const char* const kColumns[] = {"snr_db", "sf", "superbin_size", "averaging_depth", "mode", "channel",
                                "errors", "trials", "ser", "ci95_lo", "ci95_hi"};
constexpr std::size_t kColumnCount = std::size(kColumns);

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

void write_header(std::ostream& out, const char* schema, const ExperimentConfig& config) {
    out << "# " << schema << " v" << kResultsSchemaVersion << '\n'
        << "# tool_version: " << kToolVersion << '\n'
        << "# master_seed: " << config.master_seed << '\n'
        << "# config: " << config_to_json(config).dump() << '\n';
}

json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double parse_real(const std::string& s, const std::string& source, std::size_t line) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(source, line, "bad number '" + s + "'");
    return v;
}

template <class T>
T parse_uint(const std::string& s, const std::string& source, std::size_t line) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(source, line, "bad integer '" + s + "'");
    return v;
}

} // namespace

ResultFormat parse_result_format(const std::string& text) {
    if (text == "csv") return ResultFormat::csv;
    if (text == "json") return ResultFormat::json;
    throw ConfigError("unknown output format '" + text + "' (expected csv or json)");
}

ResultFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".json" ? ResultFormat::json : ResultFormat::csv;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

void write_results_csv(std::ostream& out, const std::vector<SerResult>& results, const ExperimentConfig& config) {
    write_header(out, kResultsSchema, config);
    for (std::size_t i = 0; i < kColumnCount; ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& r : results) {
        out << format_double(r.snr_db) << ',' << r.sf << ',' << r.superbin_size << ',' << r.averaging_depth << ','
            << csv_field(r.mode) << ',' << csv_field(r.channel) << ',' << r.errors << ',' << r.trials << ','
            << format_double(r.ser) << ',' << format_double(r.ci_lo) << ',' << format_double(r.ci_hi) << '\n';
    }
}

json results_to_json(const std::vector<SerResult>& results, const ExperimentConfig& config) {
    json rows = json::array();
    for (const auto& r : results) {
        rows.push_back({{"snr_db", json_number(r.snr_db)},
                        {"sf", r.sf},
                        {"superbin_size", r.superbin_size},
                        {"averaging_depth", r.averaging_depth},
                        {"mode", r.mode},
                        {"channel", r.channel},
                        {"errors", r.errors},
                        {"trials", r.trials},
                        {"ser", r.ser},
                        {"ci95_lo", r.ci_lo},
                        {"ci95_hi", r.ci_hi}});
    }
    return {{"schema", kResultsSchema},
            {"version", kResultsSchemaVersion},
            {"tool_version", kToolVersion},
            {"master_seed", config.master_seed},
            {"config", config_to_json(config)},
            {"results", rows}};
}

std::vector<SerResult> parse_results_csv(std::istream& in, const std::string& source) {
    std::vector<SerResult> out;
    std::string line;
    std::size_t lineno = 0;
    bool saw_schema = false, saw_columns = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (lineno == 1) {
                const std::string expected = std::string("# ") + kResultsSchema + " v";
                if (line.rfind(expected, 0) != 0) throw ParseError(source, lineno, "not a results file");
                const auto version = parse_uint<int>(line.substr(expected.size()), source, lineno);
                if (version != kResultsSchemaVersion) {
                    throw ParseError(source, lineno, "unsupported schema version " + std::to_string(version));
                }
                saw_schema = true;
            }
            continue;
        }
        if (!saw_schema) throw ParseError(source, lineno, "missing schema header");
        const auto f = split_csv(line);
        if (!saw_columns) {
            if (f.size() != kColumnCount) throw ParseError(source, lineno, "unexpected column header");
            for (std::size_t i = 0; i < kColumnCount; ++i) {
                if (f[i] != kColumns[i]) throw ParseError(source, lineno, "unexpected column '" + f[i] + "'");
            }
            saw_columns = true;
            continue;
        }
        if (f.size() != kColumnCount) {
            throw ParseError(source, lineno,
                             "expected " + std::to_string(kColumnCount) + " fields, got " + std::to_string(f.size()));
        }
        SerResult r;
        r.snr_db = parse_real(f[0], source, lineno);
        r.sf = parse_uint<int>(f[1], source, lineno);
        r.superbin_size = parse_uint<std::size_t>(f[2], source, lineno);
        r.averaging_depth = parse_uint<std::size_t>(f[3], source, lineno);
        r.mode = f[4];
        r.channel = f[5];
        r.errors = parse_uint<std::uint64_t>(f[6], source, lineno);
        r.trials = parse_uint<std::uint64_t>(f[7], source, lineno);
        r.ser = parse_real(f[8], source, lineno);
        r.ci_lo = parse_real(f[9], source, lineno);
        r.ci_hi = parse_real(f[10], source, lineno);
        if (r.errors > r.trials) throw ParseError(source, lineno, "errors exceed trials");
        out.push_back(std::move(r));
    }
    if (!saw_schema) throw ParseError(source, 0, "empty results file");
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

void emit_results(const std::vector<SerResult>& results, ResultFormat format, const std::filesystem::path& path,
                  const ExperimentConfig& config) {
    if (results.empty()) throw ParameterError("no results to write to " + path.string());
    std::ostringstream os;
    if (format == ResultFormat::csv) {
        write_results_csv(os, results, config);
    } else {
        os << results_to_json(results, config).dump(2) << '\n';
    }
    write_file_atomic(path, os.str());
}

void write_capture_csv(std::ostream& out, const std::vector<DistributionCapture>& captures,
                       const ExperimentConfig& config) {
    write_header(out, "cssplc-capture", config);
    out << "snr_db,quantity,q,value\n";
    auto rows = [&](const std::string& snr, const char* name, std::size_t q, const std::vector<double>& v) {
        for (double x : v) out << snr << ',' << name << ',' << q << ',' << format_double(x) << '\n';
    };
    for (const auto& c : captures) {
        const std::string snr = format_double(c.snr_db);
        rows(snr, "signal", 1, c.signal);
        rows(snr, "noise", 1, c.noise);
        rows(snr, "max_noise", 1, c.max_noise);
        for (const auto& a : c.averaged) {
            rows(snr, "signal", a.q, a.signal);
            rows(snr, "noise", a.q, a.noise);
            rows(snr, "max_noise", a.q, a.max_noise);
        }
    }
}

namespace {

json stats_json(const std::vector<double>& v) {
    if (v.empty()) return nullptr;
    const SummaryStats s = histogram_stats(v);
    return {{"count", s.count},
            {"mean", s.mean},
            {"variance", s.variance},
            {"min", s.min},
            {"max", s.max},
            {"q05", s.q05},
            {"q25", s.q25},
            {"median", s.median},
            {"q75", s.q75},
            {"q95", s.q95},
            {"histogram",
             {{"first_edge", s.histogram.first_edge},
              {"bin_width", s.histogram.bin_width},
              {"counts", s.histogram.counts}}}};
}

} // namespace

json capture_summary_json(const std::vector<DistributionCapture>& captures, const ExperimentConfig& config) {
    json points = json::array();
    for (const auto& c : captures) {
        json averaged = json::array();
        for (const auto& a : c.averaged) {
            averaged.push_back({{"q", a.q},
                                {"signal", stats_json(a.signal)},
                                {"noise", stats_json(a.noise)},
                                {"max_noise", stats_json(a.max_noise)}});
        }
        points.push_back({{"snr_db", json_number(c.snr_db)},
                          {"symbol", c.symbol},
                          {"noise_reference", c.noise_reference},
                          {"signal", stats_json(c.signal)},
                          {"noise", stats_json(c.noise)},
                          {"max_noise", stats_json(c.max_noise)},
                          {"averaged", averaged}});
    }
    return {{"schema", "cssplc-capture"},
            {"version", kResultsSchemaVersion},
            {"tool_version", kToolVersion},
            {"master_seed", config.master_seed},
            {"config", config_to_json(config)},
            {"captures", points}};
}

} // namespace cssplc
