#include "mlm/config.hpp"

#include <charconv>
#include <fstream>
#include <span>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "mlm/errors.hpp"

namespace mlm {

namespace {

int line_of(const YAML::Node& n) {
    const YAML::Mark m = n.Mark();
    return m.line >= 0 ? m.line + 1 : 0;
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& where, const char* expected) {
    if (!n.IsScalar()) throw ConfigError(fmt::format("{}: expected {}", where, expected), line_of(n));
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("{}: expected {}, got '{}'", where, expected, n.Scalar()), line_of(n));
    }
}

double number(const YAML::Node& n, const std::string& where) { return scalar<double>(n, where, "a number"); }

std::vector<double> numbers(const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence()) throw ConfigError(where + ": expected a list of numbers", line_of(n));
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], fmt::format("{}[{}]", where, i)));
    return out;
}

// Map view that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ && !node_.IsMap() && !node_.IsNull()) {
            throw ConfigError(fmt::format("{}: expected a mapping", label()), line_of(node_));
        }
    }

    YAML::Node get(const char* key) {
        seen_.insert(key);
        // Const lookups never insert; a missing key yields an undefined node.
        static const YAML::Node empty = YAML::Load("{}");
        const YAML::Node& map = node_ && node_.IsMap() ? node_ : empty;
        return map[key];
    }

    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void read(const char* key, double& out) {
        if (auto n = get(key)) out = number(n, where(key));
    }
    void read(const char* key, int& out) {
        if (auto n = get(key)) out = scalar<int>(n, where(key), "an integer");
    }
    void read(const char* key, std::uint64_t& out) {
        if (auto n = get(key)) {
            const auto text = scalar<std::string>(n, where(key), "a non-negative integer");
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
            if (ec != std::errc{} || ptr != text.data() + text.size()) {
                throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", where(key), text),
                                  line_of(n));
            }
        }
    }
    void read(const char* key, bool& out) {
        if (auto n = get(key)) out = scalar<bool>(n, where(key), "true or false");
    }
    void read(const char* key, std::string& out) {
        if (auto n = get(key)) out = scalar<std::string>(n, where(key), "a string");
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError(fmt::format("unknown key '{}'", where(key.c_str())), line_of(kv.first));
        }
    }

private:
    std::string label() const { return path_.empty() ? "document" : path_; }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

WiringRule::Kind parse_kind(const YAML::Node& n, const std::string& where) {
    const auto s = scalar<std::string>(n, where, "a string");
    if (s == "resistor") return WiringRule::Kind::Resistor;
    if (s == "memristor") return WiringRule::Kind::Memristor;
    if (s == "source") return WiringRule::Kind::Source;
    if (s == "short") return WiringRule::Kind::Short;
    throw ConfigError(fmt::format("{}: unknown element kind '{}'", where, s), line_of(n));
}

std::string_view kind_name(WiringRule::Kind k) {
    switch (k) {
        case WiringRule::Kind::Resistor: return "resistor";
        case WiringRule::Kind::Memristor: return "memristor";
        case WiringRule::Kind::Source: return "source";
        case WiringRule::Kind::Short: return "short";
    }
    return "resistor";
}

void parse_device(Section s, DeviceSetup& d) {
    if (auto n = s.get("model")) {
        try {
            d.kind = parse_device_model(scalar<std::string>(n, s.where("model"), "a string"));
        } catch (const InvalidParameter& e) {
            throw ConfigError(e.what(), line_of(n));
        }
    }
    auto& p = d.params;
    s.read("r_on", p.r_on);
    s.read("r_off", p.r_off);
    s.read("v_th_pos", p.v_th_pos);
    s.read("v_th_neg", p.v_th_neg);
    s.read("drift_rate", p.drift_rate);
    s.read("window_p", p.window_p);
    s.read("temp_coeff", p.temp_coeff);
    s.read("t_ref", p.t_ref);
    s.read("ideal_w1", p.ideal_w1);
    s.read("ideal_w2", p.ideal_w2);
    s.finish();
}

void parse_topology(Section s, CellTopology& t) {
    s.read("n_subcells", t.n_subcells);
    if (t.n_subcells < 1) throw ConfigError("topology.n_subcells must be >= 1", line_of(s.get("n_subcells")));
    const auto n = static_cast<std::size_t>(t.n_subcells);
    if (auto r = s.get("r_series")) {
        if (r.IsSequence()) {
            t.r_series = numbers(r, s.where("r_series"));
        } else {
            t.r_series.assign(n, number(r, s.where("r_series")));
        }
    } else if (t.r_series.size() != n) {
        t.r_series.assign(n, t.r_series.empty() ? 500.0 : t.r_series.front());
    }
    s.read("r_write", t.r_write);
    s.read("r_read", t.r_read);
    s.read("r_reset", t.r_reset);
    s.read("r_ground", t.r_ground);
    s.read("probe", t.probe_node);
    if (auto w = s.get("wiring")) {
        if (!w.IsSequence()) throw ConfigError("topology.wiring: expected a list of rules", line_of(w));
        t.wiring.clear();
        for (std::size_t i = 0; i < w.size(); ++i) {
            Section r(w[i], fmt::format("topology.wiring[{}]", i));
            WiringRule rule;
            if (auto k = r.get("kind")) {
                rule.kind = parse_kind(k, r.where("kind"));
            } else {
                throw ConfigError(fmt::format("topology.wiring[{}]: missing 'kind'", i), line_of(w[i]));
            }
            r.read("a", rule.node_a);
            r.read("b", rule.node_b);
            r.read("value", rule.value);
            r.read("per_subcell", rule.per_subcell);
            r.finish();
            t.wiring.push_back(std::move(rule));
        }
    }
    s.finish();
}

void parse_encoder(Section s, EncoderConfig& e, BinTable& table) {
    s.read("comparator_rail", e.comparator_rail);
    s.read("logic_rail", e.logic_rail);
    s.read("v_th", e.v_th);
    s.read("sum_r1", e.sum_r1);
    s.read("sum_r2", e.sum_r2);
    s.read("summer_rail", e.summer_rail);
    s.read("comparator_offset", e.comparator_offset);
    s.read("threshold_low_output", e.threshold_low_output);
    if (auto b = s.get("logic0_band")) {
        const auto v = numbers(b, s.where("logic0_band"));
        if (v.size() != 2) throw ConfigError("encoder.logic0_band: expected 2 numbers", line_of(b));
        e.logic0_output_band = {v[0], v[1]};
    }
    if (auto l = s.get("write_levels")) {
        const auto v = numbers(l, s.where("write_levels"));
        if (v.size() != 3) throw ConfigError("encoder.write_levels: expected 3 numbers", line_of(l));
        e.write_levels = {v[0], v[1], v[2]};
    }
    if (auto tb = s.get("table")) {
        if (!tb.IsSequence()) throw ConfigError("encoder.table: expected a list of rows", line_of(tb));
        table.rows.clear();
        for (std::size_t i = 0; i < tb.size(); ++i) {
            Section r(tb[i], fmt::format("encoder.table[{}]", i));
            BinRow row{0.0, 0.0, {}};
            auto a1 = r.get("a1");
            auto a2 = r.get("a2");
            auto code = r.get("code");
            if (!a1 || !a2 || !code) {
                throw ConfigError(fmt::format("encoder.table[{}]: rows need a1, a2 and code", i), line_of(tb[i]));
            }
            row.a1 = number(a1, r.where("a1"));
            row.a2 = number(a2, r.where("a2"));
            try {
                row.code = TernaryCode::parse(scalar<std::string>(code, r.where("code"), "a string"));
            } catch (const InvalidParameter& ex) {
                throw ConfigError(ex.what(), line_of(code));
            }
            r.finish();
            table.rows.push_back(std::move(row));
        }
    }
    s.finish();
}

void parse_cycle(Section s, CycleConfig& c) {
    s.read("v_reset", c.v_reset);
    s.read("t_reset", c.t_reset);
    s.read("v_read", c.v_read);
    s.read("t_write", c.t_write);
    s.read("t_read", c.t_read);
    s.read("dt", c.dt);
    if (auto t = s.get("temperature_c")) c.temperature = number(t, s.where("temperature_c")) + kZeroCelsius;
    s.read("read_tolerance", c.read_tolerance);
    s.read("write_return_via_reset", c.write_return_via_reset);
    s.finish();
}

void parse_calibration(Section s, CalibrationOptions& o) {
    if (auto f = s.get("free")) {
        if (!f.IsSequence()) throw ConfigError("calibration.free: expected a list of parameter names", line_of(f));
        o.free.clear();
        for (std::size_t i = 0; i < f.size(); ++i) {
            try {
                o.free.push_back(parse_fit_param(scalar<std::string>(f[i], "calibration.free", "a string")));
            } catch (const InvalidParameter& e) {
                throw ConfigError(e.what(), line_of(f[i]));
            }
        }
    }
    s.read("restarts", o.restarts);
    s.read("seed", o.seed);
    s.read("restart_spread", o.restart_spread);
    s.read("initial_step", o.initial_step);
    s.read("max_iterations", o.max_iterations);
    s.read("size_tolerance", o.size_tolerance);
    s.read("min_separation", o.min_separation_fraction);
    s.read("min_saturation", o.min_saturation_state);
    s.finish();
}

SimConfig from_yaml(const YAML::Node& root) {
    SimConfig cfg;
    Section top(root, "");
    parse_device(Section(top.get("device"), "device"), cfg.setup.device);
    parse_topology(Section(top.get("topology"), "topology"), cfg.setup.topology);
    parse_encoder(Section(top.get("encoder"), "encoder"), cfg.setup.encoder, cfg.setup.table);
    parse_cycle(Section(top.get("cycle"), "cycle"), cfg.setup.cycle);
    {
        Section s(top.get("noise"), "noise");
        s.read("sigma", cfg.noise.source_noise_sigma);
        s.read("seed", cfg.noise.rng_seed);
        s.finish();
    }
    {
        Section s(top.get("sweep"), "sweep");
        s.read("start", cfg.sweep.start);
        s.read("stop", cfg.sweep.stop);
        s.read("step", cfg.sweep.step);
        s.finish();
    }
    {
        Section s(top.get("study"), "study");
        if (auto t = s.get("temperatures_c")) cfg.study.temperatures_c = numbers(t, "study.temperatures_c");
        s.read("trials", cfg.study.trials);
        s.finish();
    }
    parse_calibration(Section(top.get("calibration"), "calibration"), cfg.calibration);
    {
        Section s(top.get("output"), "output");
        s.read("dir", cfg.output_dir);
        s.finish();
    }
    top.finish();
    return cfg;
}

std::string num(double v) { return fmt::format("{}", v); }

void emit_numbers(YAML::Emitter& out, const char* key, std::span<const double> values) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double v : values) out << num(v);
    out << YAML::EndSeq;
}

}  // namespace

void SimConfig::validate() const {
    setup.validate();
    if (!(noise.source_noise_sigma >= 0.0)) throw InvalidParameter("noise.sigma must be >= 0");
    if (!(sweep.step > 0.0) || !(sweep.stop >= sweep.start)) throw InvalidParameter("sweep needs step > 0 and stop >= start");
    if (study.temperatures_c.empty()) throw InvalidParameter("study.temperatures_c is empty");
    for (double t : study.temperatures_c) {
        if (!(t + kZeroCelsius > 0.0)) throw InvalidParameter("study temperatures must be above absolute zero");
    }
    if (study.trials < 2) throw InvalidParameter("study.trials must be >= 2");
    if (calibration.restarts < 1) throw InvalidParameter("calibration.restarts must be >= 1");
    if (calibration.free.empty()) throw InvalidParameter("calibration.free is empty");
}

SimConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
    }
    SimConfig cfg = from_yaml(root);
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'", 0);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const SimConfig& c) {
    const auto& s = c.setup;
    YAML::Emitter out;
    out << YAML::BeginMap;

    const auto& p = s.device.params;
    out << YAML::Key << "device" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "model" << YAML::Value << std::string(to_string(s.device.kind));
    out << YAML::Key << "r_on" << YAML::Value << num(p.r_on);
    out << YAML::Key << "r_off" << YAML::Value << num(p.r_off);
    out << YAML::Key << "v_th_pos" << YAML::Value << num(p.v_th_pos);
    out << YAML::Key << "v_th_neg" << YAML::Value << num(p.v_th_neg);
    out << YAML::Key << "drift_rate" << YAML::Value << num(p.drift_rate);
    out << YAML::Key << "window_p" << YAML::Value << p.window_p;
    out << YAML::Key << "temp_coeff" << YAML::Value << num(p.temp_coeff);
    out << YAML::Key << "t_ref" << YAML::Value << num(p.t_ref);
    out << YAML::Key << "ideal_w1" << YAML::Value << num(p.ideal_w1);
    out << YAML::Key << "ideal_w2" << YAML::Value << num(p.ideal_w2);
    out << YAML::EndMap;

    const auto& t = s.topology;
    out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n_subcells" << YAML::Value << t.n_subcells;
    emit_numbers(out, "r_series", t.r_series);
    out << YAML::Key << "r_write" << YAML::Value << num(t.r_write);
    out << YAML::Key << "r_read" << YAML::Value << num(t.r_read);
    out << YAML::Key << "r_reset" << YAML::Value << num(t.r_reset);
    out << YAML::Key << "r_ground" << YAML::Value << num(t.r_ground);
    out << YAML::Key << "probe" << YAML::Value << t.probe_node;
    out << YAML::Key << "wiring" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : t.wiring) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << std::string(kind_name(r.kind));
        out << YAML::Key << "a" << YAML::Value << YAML::DoubleQuoted << r.node_a;
        out << YAML::Key << "b" << YAML::Value << YAML::DoubleQuoted << r.node_b;
        out << YAML::Key << "value" << YAML::Value << YAML::DoubleQuoted << r.value;
        out << YAML::Key << "per_subcell" << YAML::Value << r.per_subcell;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    const auto& e = s.encoder;
    out << YAML::Key << "encoder" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "comparator_rail" << YAML::Value << num(e.comparator_rail);
    out << YAML::Key << "logic_rail" << YAML::Value << num(e.logic_rail);
    out << YAML::Key << "v_th" << YAML::Value << num(e.v_th);
    out << YAML::Key << "sum_r1" << YAML::Value << num(e.sum_r1);
    out << YAML::Key << "sum_r2" << YAML::Value << num(e.sum_r2);
    out << YAML::Key << "summer_rail" << YAML::Value << num(e.summer_rail);
    out << YAML::Key << "comparator_offset" << YAML::Value << num(e.comparator_offset);
    out << YAML::Key << "threshold_low_output" << YAML::Value << num(e.threshold_low_output);
    emit_numbers(out, "logic0_band", e.logic0_output_band);
    emit_numbers(out, "write_levels", e.write_levels);
    out << YAML::Key << "table" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : s.table.rows) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "a1" << YAML::Value << num(r.a1);
        out << YAML::Key << "a2" << YAML::Value << num(r.a2);
        out << YAML::Key << "code" << YAML::Value << YAML::DoubleQuoted << r.code.str();
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    const auto& cy = s.cycle;
    out << YAML::Key << "cycle" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "v_reset" << YAML::Value << num(cy.v_reset);
    out << YAML::Key << "t_reset" << YAML::Value << num(cy.t_reset);
    out << YAML::Key << "v_read" << YAML::Value << num(cy.v_read);
    out << YAML::Key << "t_write" << YAML::Value << num(cy.t_write);
    out << YAML::Key << "t_read" << YAML::Value << num(cy.t_read);
    out << YAML::Key << "dt" << YAML::Value << num(cy.dt);
    out << YAML::Key << "temperature_c" << YAML::Value << num(cy.temperature - kZeroCelsius);
    out << YAML::Key << "read_tolerance" << YAML::Value << num(cy.read_tolerance);
    out << YAML::Key << "write_return_via_reset" << YAML::Value << cy.write_return_via_reset;
    out << YAML::EndMap;

    out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "sigma" << YAML::Value << num(c.noise.source_noise_sigma);
    out << YAML::Key << "seed" << YAML::Value << c.noise.rng_seed;
    out << YAML::EndMap;

    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value << num(c.sweep.start);
    out << YAML::Key << "stop" << YAML::Value << num(c.sweep.stop);
    out << YAML::Key << "step" << YAML::Value << num(c.sweep.step);
    out << YAML::EndMap;

    out << YAML::Key << "study" << YAML::Value << YAML::BeginMap;
    emit_numbers(out, "temperatures_c", c.study.temperatures_c);
    out << YAML::Key << "trials" << YAML::Value << c.study.trials;
    out << YAML::EndMap;

    const auto& o = c.calibration;
    out << YAML::Key << "calibration" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "free" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (FitParam f : o.free) out << std::string(to_string(f));
    out << YAML::EndSeq;
    out << YAML::Key << "restarts" << YAML::Value << o.restarts;
    out << YAML::Key << "seed" << YAML::Value << o.seed;
    out << YAML::Key << "restart_spread" << YAML::Value << num(o.restart_spread);
    out << YAML::Key << "initial_step" << YAML::Value << num(o.initial_step);
    out << YAML::Key << "max_iterations" << YAML::Value << o.max_iterations;
    out << YAML::Key << "size_tolerance" << YAML::Value << num(o.size_tolerance);
    out << YAML::Key << "min_separation" << YAML::Value << num(o.min_separation_fraction);
    out << YAML::Key << "min_saturation" << YAML::Value << num(o.min_saturation_state);
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << c.output_dir;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace mlm
