#include "mlm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "mlm/errors.hpp"

namespace mlm {

namespace {

// Shortest round-trip form, so output is stable and lossless.
std::string num(double v) { return fmt::format("{}", v); }

std::string optional_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r' && c != '"') {
            cell += c;
        }
    }
    out.push_back(cell);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

}  // namespace

void write_measurements_csv(std::ostream& out, std::span<const Measurement> rows, std::span<const TernaryCode> codes,
                            bool with_quantized) {
    out << (with_quantized ? "v_in,code,quantized_code,temp_C,trial,v_out\n" : "v_in,code,temp_C,trial,v_out\n");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Measurement& m = rows[i];
        const std::string code = i < codes.size() ? codes[i].str() : m.code.str();
        fmt::print(out, "{},{},", optional_num(m.v_in), code);
        if (with_quantized) fmt::print(out, "{},", m.code.str());
        fmt::print(out, "{},0,{}\n", num(m.temperature - kZeroCelsius), num(m.v_out));
    }
}

void write_patterns_csv(std::ostream& out, std::span<const Measurement> rows, std::span<const TernaryCode> codes) {
    const std::size_t ports = rows.empty() ? 0 : rows.front().applied.port_voltages.size();
    out << "v_in,code";
    for (std::size_t p = 0; p < ports; ++p) out << ",v_w" << p + 1;
    out << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Measurement& m = rows[i];
        out << optional_num(m.v_in) << ',' << (i < codes.size() ? codes[i].str() : m.code.str());
        for (double v : m.applied.port_voltages) out << ',' << num(v);
        out << '\n';
    }
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
    out << "v_in,code,temp_C,trial,v_out\n";
    for (const auto& t : trials) {
        fmt::print(out, ",{},{},{},{}\n", t.code.str(), num(t.temperature_c), t.trial, num(t.v_out));
    }
}

void write_stats_csv(std::ostream& out, std::span<const StudyStats> stats) {
    out << "code,temp_C,mean_V,stdev_V\n";
    for (const auto& s : stats) fmt::print(out, "{},{},{},{}\n", s.code.str(), num(s.temperature_c), num(s.mean), num(s.stdev));
}

void write_fit_csv(std::ostream& out, std::span<const CodeFit> fits) {
    out << "code,target_V,simulated_V,rel_error\n";
    for (const auto& f : fits) {
        fmt::print(out, "{},{},{},{}\n", f.code.str(), num(f.target), num(f.simulated), num(f.relative_error));
    }
}

std::vector<CalibrationTarget> parse_targets_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        header = split(line);
    }
    if (header.empty()) throw ConfigError("targets file is empty", 0);
    const auto col = [&](std::initializer_list<const char*> names) -> long {
        for (const char* n : names) {
            auto it = std::find(header.begin(), header.end(), n);
            if (it != header.end()) return it - header.begin();
        }
        return -1;
    };
    const long code_col = col({"code"});
    const long value_col = col({"mean_V", "v_out", "target_V"});
    if (code_col < 0 || value_col < 0) {
        throw ConfigError("targets header needs a 'code' column and a 'mean_V' or 'v_out' column", line_no);
    }

    std::vector<CalibrationTarget> targets;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        const auto cells = split(line);
        if (static_cast<long>(cells.size()) <= std::max(code_col, value_col)) {
            throw ConfigError("targets row has too few columns", line_no);
        }
        CalibrationTarget t;
        try {
            t.code = TernaryCode::parse(cells[static_cast<std::size_t>(code_col)]);
        } catch (const InvalidParameter& e) {
            throw ConfigError(e.what(), line_no);
        }
        const std::string& v = cells[static_cast<std::size_t>(value_col)];
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), t.v_out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw ConfigError("targets value '" + v + "' is not a number", line_no);
        }
        if (!(t.v_out > 0.0)) throw ConfigError("targets must be positive voltages", line_no);
        targets.push_back(std::move(t));
    }
    if (targets.empty()) throw ConfigError("targets file has no rows", line_no);
    return targets;
}

std::vector<CalibrationTarget> read_targets_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read targets file '" + path.string() + "'", 0);
    return parse_targets_csv(in);
}

}  // namespace mlm
