#include "mlm/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "mlm/errors.hpp"

namespace mlm {

TernaryCode::TernaryCode(std::initializer_list<int> trits) {
    for (int t : trits) {
        if (t < 0 || t > 2) throw InvalidParameter(fmt::format("trit {} outside {{0,1,2}}", t));
        trits_.push_back(static_cast<std::uint8_t>(t));
    }
}

TernaryCode::TernaryCode(std::vector<std::uint8_t> trits) : trits_(std::move(trits)) {
    for (auto t : trits_) {
        if (t > 2) throw InvalidParameter(fmt::format("trit {} outside {{0,1,2}}", t));
    }
}

TernaryCode TernaryCode::parse(std::string_view digits) {
    if (digits.empty()) throw InvalidParameter("empty ternary code");
    std::vector<std::uint8_t> trits;
    for (char c : digits) {
        if (c < '0' || c > '2') throw InvalidParameter("invalid ternary code '" + std::string(digits) + "'");
        trits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return TernaryCode(std::move(trits));
}

std::string TernaryCode::str() const {
    std::string out;
    for (auto t : trits_) out += static_cast<char>('0' + t);
    return out;
}

BinTable BinTable::reference() {
    return {{
        {0.00, 0.30, TernaryCode::parse("222")},
        {0.31, 0.60, TernaryCode::parse("122")},
        {0.61, 0.90, TernaryCode::parse("112")},
        {0.91, 1.20, TernaryCode::parse("022")},
        {1.21, 1.50, TernaryCode::parse("012")},
        {1.51, 1.80, TernaryCode::parse("111")},
        {1.81, 2.10, TernaryCode::parse("002")},
        {2.11, 2.40, TernaryCode::parse("011")},
        {2.41, 2.70, TernaryCode::parse("001")},
        {2.71, 3.00, TernaryCode::parse("000")},
    }};
}

double BinTable::upper_edge(std::size_t row) const {
    return row + 1 < rows.size() ? rows[row + 1].a1 : rows.back().a2;
}

std::vector<double> BinTable::interior_edges() const {
    std::vector<double> edges;
    for (std::size_t i = 1; i < rows.size(); ++i) edges.push_back(rows[i].a1);
    return edges;
}

std::size_t BinTable::row_of(const TernaryCode& code) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].code == code) return i;
    }
    throw InvalidParameter("code " + code.str() + " is not in the bin table");
}

void BinTable::validate() const {
    if (rows.empty()) throw InvalidParameter("bin table is empty");
    std::set<TernaryCode> seen;
    const std::size_t ports = rows.front().code.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const BinRow& r = rows[i];
        if (!(r.a2 >= r.a1)) throw InvalidParameter(fmt::format("bin row {}: a2 < a1", i + 1));
        if (i > 0 && !(r.a1 > rows[i - 1].a2)) {
            throw InvalidParameter(fmt::format("bin row {} overlaps or is out of order", i + 1));
        }
        if (r.code.size() != ports) throw InvalidParameter(fmt::format("bin row {}: code width differs", i + 1));
        if (!seen.insert(r.code).second) {
            throw InvalidParameter(fmt::format("bin row {}: code {} repeated", i + 1, r.code.str()));
        }
    }
}

void EncoderConfig::validate() const {
    if (!(comparator_rail > 0.0)) throw InvalidParameter("encoder: comparator_rail must be > 0");
    if (!(logic_rail > 0.0)) throw InvalidParameter("encoder: logic_rail must be > 0");
    if (!(std::abs(v_th) < logic_rail)) throw InvalidParameter("encoder: v_th must lie within the logic rails");
    if (!(sum_r1 > 0.0) || sum_r2 < 0.0) throw InvalidParameter("encoder: summer resistors must be positive");
    if (!(summer_rail > 0.0)) throw InvalidParameter("encoder: summer_rail must be > 0");
    if (!(logic0_output_band[0] <= logic0_output_band[1])) {
        throw InvalidParameter("encoder: logic0_output_band must be ordered");
    }
    if (!(write_levels[0] < write_levels[1] && write_levels[1] < write_levels[2])) {
        throw InvalidParameter("encoder: write levels must be strictly increasing");
    }
}

std::size_t bin_index(double v_in, const BinTable& table) {
    if (!(v_in >= table.lower() && v_in <= table.upper())) {
        throw OutOfRange(fmt::format("input {} V outside encoder range [{}, {}] V", v_in, table.lower(),
                                     table.upper()));
    }
    const auto& rows = table.rows;
    auto it = std::upper_bound(rows.begin(), rows.end(), v_in,
                               [](double v, const BinRow& r) { return v < r.a1; });
    return static_cast<std::size_t>(it - rows.begin()) - 1;
}

TernaryCode encode_behavioral(double v_in, const BinTable& table) {
    return table.rows[bin_index(v_in, table)].code;
}

WritePattern code_to_write_voltages(const TernaryCode& code, const std::array<double, 3>& levels) {
    WritePattern pattern;
    pattern.port_voltages.reserve(code.size());
    for (auto t : code.trits()) pattern.port_voltages.push_back(levels[t]);
    return pattern;
}

namespace {

// Ideal open-loop comparator: rail-saturated sign of the differential input.
double comparator(double differential, double rail, bool high_on_zero) {
    if (differential > 0.0 || (high_on_zero && differential == 0.0)) return rail;
    return -rail;
}

}  // namespace

WritePattern encode_structural(double v_in, const BinTable& table, const EncoderConfig& cfg) {
    if (!(v_in >= table.lower() && v_in <= table.upper())) {
        throw OutOfRange(fmt::format("input {} V outside encoder range [{}, {}] V", v_in, table.lower(),
                                     table.upper()));
    }
    const std::size_t ports = table.rows.front().code.size();
    const std::size_t last = table.rows.size() - 1;
    WritePattern out;
    out.port_voltages.resize(ports, 0.0);

    for (std::size_t port = 0; port < ports; ++port) {
        double input_sum = 0.0;
        int inputs = 0;
        for (std::size_t row = 0; row < table.rows.size(); ++row) {
            const int trit = table.rows[row].code[port];
            if (trit == 0) continue;  // no selector block for a logic-0 assignment
            ++inputs;

            const double lower = comparator(v_in - table.rows[row].a1 + cfg.comparator_offset,
                                            cfg.comparator_rail, true);
            const double upper = comparator(table.upper_edge(row) - v_in + cfg.comparator_offset,
                                            cfg.comparator_rail, row == last);
            const double gate = std::min(std::clamp(lower, -cfg.logic_rail, cfg.logic_rail),
                                         std::clamp(upper, -cfg.logic_rail, cfg.logic_rail));
            input_sum += gate > cfg.v_th ? cfg.write_levels[static_cast<std::size_t>(trit)]
                                         : cfg.threshold_low_output;
        }
        if (inputs == 0) continue;
        // Non-inverting summer: equal input resistors average the inputs and
        // the gain 1 + R2/R1 = inputs restores the sum.
        const double r2 = cfg.sum_r2 > 0.0 ? cfg.sum_r2 : cfg.sum_r1 * (inputs - 1);
        const double gain = 1.0 + r2 / cfg.sum_r1;
        const double v = gain * (input_sum / inputs);
        out.port_voltages[port] = std::clamp(v, -cfg.summer_rail, cfg.summer_rail);
    }
    return out;
}

int quantize_write_voltage(double v, const EncoderConfig& cfg) {
    const auto& l = cfg.write_levels;
    if (v >= 0.5 * (l[1] + l[2])) return 2;
    if (v >= 0.5 * (l[0] + l[1])) return 1;
    return 0;
}

TernaryCode quantize_pattern(const WritePattern& pattern, const EncoderConfig& cfg) {
    std::vector<std::uint8_t> trits;
    trits.reserve(pattern.port_voltages.size());
    for (double v : pattern.port_voltages) trits.push_back(static_cast<std::uint8_t>(quantize_write_voltage(v, cfg)));
    return TernaryCode(std::move(trits));
}

EquivalenceReport check_equivalence(const BinTable& table, const EncoderConfig& cfg,
                                    std::span<const double> grid, double guard_band) {
    EquivalenceReport report;
    const auto edges = table.interior_edges();
    for (double v : grid) {
        const bool near_edge = std::any_of(edges.begin(), edges.end(),
                                           [&](double e) { return std::abs(v - e) < guard_band; });
        if (near_edge) {
            ++report.skipped_near_edge;
            continue;
        }
        ++report.checked;
        const TernaryCode expected = encode_behavioral(v, table);
        WritePattern analog = encode_structural(v, table, cfg);
        TernaryCode got = quantize_pattern(analog, cfg);
        if (got != expected) report.mismatches.push_back({v, expected, std::move(got), std::move(analog)});
    }
    return report;
}

std::vector<double> sweep_grid(double start, double stop, double step) {
    if (!(step > 0.0) || !(stop >= start)) throw InvalidParameter("sweep needs step > 0 and stop >= start");
    const auto intervals = static_cast<long>(std::llround((stop - start) / step));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(intervals + 1));
    for (long i = 0; i <= intervals; ++i) {
        grid.push_back(i == intervals ? stop : start + (stop - start) * static_cast<double>(i) / intervals);
    }
    return grid;
}

}  // namespace mlm
