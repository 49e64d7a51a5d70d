#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlm {

/// Ternary write code, one trit per write port (port 1 first).
class TernaryCode {
public:
    TernaryCode() = default;
    TernaryCode(std::initializer_list<int> trits);
    explicit TernaryCode(std::vector<std::uint8_t> trits);

    /// Parses digits such as "012". Throws InvalidParameter.
    static TernaryCode parse(std::string_view digits);

    std::size_t size() const { return trits_.size(); }
    int operator[](std::size_t port) const { return trits_[port]; }
    std::span<const std::uint8_t> trits() const { return trits_; }
    std::string str() const;

    friend bool operator==(const TernaryCode&, const TernaryCode&) = default;
    friend auto operator<=>(const TernaryCode&, const TernaryCode&) = default;

private:
    std::vector<std::uint8_t> trits_;
};

struct WritePattern {
    std::vector<double> port_voltages;

    friend bool operator==(const WritePattern&, const WritePattern&) = default;
};

struct BinRow {
    double a1;  ///< lower edge, volts (owned by this row)
    double a2;  ///< printed upper edge, volts
    TernaryCode code;
};

/// Input-range to code table. Row i owns [a1_i, a1_{i+1}); the last row
/// owns [a1_last, a2_last]. The printed a2 values only matter for the last row.
struct BinTable {
    std::vector<BinRow> rows;

    static BinTable reference();

    double lower() const { return rows.front().a1; }
    double upper() const { return rows.back().a2; }
    double upper_edge(std::size_t row) const;
    /// The a1 of every row but the first.
    std::vector<double> interior_edges() const;
    std::size_t row_of(const TernaryCode& code) const;

    /// Throws InvalidParameter.
    void validate() const;
};

/// Logic level amplitudes for trits 0, 1, 2.
inline constexpr std::array<double, 3> kWriteLevels{0.0, 2.5, 4.0};

struct EncoderConfig {
    double comparator_rail = 3.0;  ///< comparators saturate at +/- this
    double logic_rail = 1.5;       ///< AND gate supplies at +/- this
    double v_th = 0.3;             ///< thresholding comparator reference
    double sum_r1 = 10.0e3;        ///< summer ground leg
    double sum_r2 = 0.0;           ///< summer feedback; 0 selects sum_r1 * (inputs - 1)
    double summer_rail = 5.0;
    double comparator_offset = 0.0;   ///< input-referred, volts
    double threshold_low_output = 0.0;  ///< thresholding block output when idle
    std::array<double, 2> logic0_output_band{-0.2, 0.004};
    std::array<double, 3> write_levels = kWriteLevels;

    /// Throws InvalidParameter.
    void validate() const;
};

/// Row index owning v_in. Throws OutOfRange outside the table domain.
std::size_t bin_index(double v_in, const BinTable& table);

TernaryCode encode_behavioral(double v_in, const BinTable& table);

WritePattern code_to_write_voltages(const TernaryCode& code,
                                    const std::array<double, 3>& levels = kWriteLevels);

/// Simulates the per-port code selector ladder: range comparators, AND,
/// thresholding comparator and non-inverting summer.
WritePattern encode_structural(double v_in, const BinTable& table, const EncoderConfig& cfg);

int quantize_write_voltage(double v, const EncoderConfig& cfg);
TernaryCode quantize_pattern(const WritePattern& pattern, const EncoderConfig& cfg);

struct EncoderMismatch {
    double v_in;
    TernaryCode behavioral;
    TernaryCode structural;
    WritePattern structural_voltages;
};

struct EquivalenceReport {
    std::vector<EncoderMismatch> mismatches;
    std::size_t checked = 0;
    std::size_t skipped_near_edge = 0;
};

EquivalenceReport check_equivalence(const BinTable& table, const EncoderConfig& cfg,
                                    std::span<const double> grid, double guard_band = 5e-3);

/// Evenly spaced points from start to stop inclusive; the endpoint is exact.
std::vector<double> sweep_grid(double start, double stop, double step);

}  // namespace mlm
