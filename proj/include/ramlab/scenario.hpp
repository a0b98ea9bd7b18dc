// Scenario files: a sectioned key-value text format describing a ground
// field, the extension layers on top of it, and run parameters.  Parsing is
// strict: unknown sections or keys are errors, and a parsed scenario
// round-trips through serialize_scenario unchanged.
//
//   [field]
//   characteristic = 0          # 0 or p
//   p = 2
//   default_precision = 64
//   tower = 1@1 1@1 1@0         # Eisenstein levels bottom first, ';' separated,
//                               # each level the full coefficient list a_0..a_e
//   [extension]
//   layer = kummer -1@0         # kind and datum digit string d0,d1,...@v
//   [run]
//   precision = 96
//   precision_cap = 2048
//   seed = 7
//   trials = 100

#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ramlab/galois.hpp"

namespace ramlab {

struct RunConfig {
    std::optional<i64> precision;
    std::optional<i64> precision_cap;
    u64 seed = 0;
    i64 trials = 50;
};

struct ScenarioLayer {
    LayerKind kind = LayerKind::kummer;
    DigitString datum;
};

struct Scenario {
    Characteristic characteristic = Characteristic::zero;
    i64 p = 2;
    i64 default_precision = 64;
    std::vector<std::vector<DigitString>> tower;
    std::vector<ScenarioLayer> layers;
    RunConfig run;
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline i64 parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const i64 v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("scenario: bad integer for " + what + ": '" + s + "'");
    }
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    enum class Sect { none, field, extension, run };
    Sect sect = Sect::none;
    bool saw_field = false, saw_p = false, saw_char = false;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::strip(raw);
        if (line.empty()) continue;
        const std::string at = " (line " + std::to_string(lineno) + ")";

        if (line.front() == '[') {
            if (line == "[field]") {
                sect = Sect::field;
                saw_field = true;
            } else if (line == "[extension]") {
                sect = Sect::extension;
            } else if (line == "[run]") {
                sect = Sect::run;
            } else {
                throw InputError("scenario: unknown section " + line + at);
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("scenario: expected key = value" + at);
        const std::string key = detail::strip(line.substr(0, eq));
        const std::string val = detail::strip(line.substr(eq + 1));

        switch (sect) {
            case Sect::none:
                throw InputError("scenario: key outside any section" + at);
            case Sect::field:
                if (key == "characteristic") {
                    saw_char = true;
                    if (val == "0")
                        sc.characteristic = Characteristic::zero;
                    else if (val == "p")
                        sc.characteristic = Characteristic::p;
                    else
                        throw InputError("scenario: characteristic must be 0 or p" + at);
                } else if (key == "p") {
                    saw_p = true;
                    sc.p = detail::parse_int(val, "p");
                } else if (key == "default_precision") {
                    sc.default_precision = detail::parse_int(val, "default_precision");
                } else if (key == "tower") {
                    sc.tower.clear();
                    std::string level;
                    std::istringstream lv(val);
                    while (std::getline(lv, level, ';')) {
                        const auto toks = detail::split_ws(level);
                        if (toks.empty())
                            throw InputError("scenario: empty tower level" + at);
                        std::vector<DigitString> coeffs;
                        for (const auto& t : toks) {
                            try {
                                coeffs.push_back(DigitString::parse(t));
                            } catch (const FieldError& e) {
                                throw InputError("scenario: " + std::string(e.what()) + at);
                            }
                        }
                        sc.tower.push_back(std::move(coeffs));
                    }
                } else {
                    throw InputError("scenario: unknown key '" + key + "' in [field]" + at);
                }
                break;
            case Sect::extension:
                if (key == "layer") {
                    const auto toks = detail::split_ws(val);
                    if (toks.size() != 2)
                        throw InputError("scenario: layer needs kind and datum" + at);
                    ScenarioLayer layer;
                    if (toks[0] == "kummer")
                        layer.kind = LayerKind::kummer;
                    else if (toks[0] == "artin_schreier")
                        layer.kind = LayerKind::artin_schreier;
                    else
                        throw InputError("scenario: unknown layer kind '" + toks[0] + "'" + at);
                    try {
                        layer.datum = DigitString::parse(toks[1]);
                    } catch (const FieldError& e) {
                        throw InputError("scenario: " + std::string(e.what()) + at);
                    }
                    sc.layers.push_back(std::move(layer));
                } else {
                    throw InputError("scenario: unknown key '" + key + "' in [extension]" + at);
                }
                break;
            case Sect::run:
                if (key == "precision")
                    sc.run.precision = detail::parse_int(val, "precision");
                else if (key == "precision_cap")
                    sc.run.precision_cap = detail::parse_int(val, "precision_cap");
                else if (key == "seed")
                    sc.run.seed = static_cast<u64>(detail::parse_int(val, "seed"));
                else if (key == "trials")
                    sc.run.trials = detail::parse_int(val, "trials");
                else
                    throw InputError("scenario: unknown key '" + key + "' in [run]" + at);
                break;
        }
    }

    if (!saw_field || !saw_char || !saw_p)
        throw InputError("scenario: [field] with characteristic and p is required");
    if (sc.layers.empty())
        throw InputError("scenario: [extension] must declare at least one layer");
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("scenario: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

inline std::string serialize_scenario(const Scenario& sc) {
    std::ostringstream out;
    out << "[field]\n";
    out << "characteristic = " << (sc.characteristic == Characteristic::zero ? "0" : "p")
        << "\n";
    out << "p = " << sc.p << "\n";
    out << "default_precision = " << sc.default_precision << "\n";
    if (!sc.tower.empty()) {
        out << "tower = ";
        for (std::size_t l = 0; l < sc.tower.size(); ++l) {
            if (l) out << "; ";
            for (std::size_t c = 0; c < sc.tower[l].size(); ++c) {
                if (c) out << " ";
                out << sc.tower[l][c].to_string();
            }
        }
        out << "\n";
    }
    out << "\n[extension]\n";
    for (const auto& layer : sc.layers)
        out << "layer = "
            << (layer.kind == LayerKind::kummer ? "kummer" : "artin_schreier") << " "
            << layer.datum.to_string() << "\n";
    out << "\n[run]\n";
    if (sc.run.precision) out << "precision = " << *sc.run.precision << "\n";
    if (sc.run.precision_cap) out << "precision_cap = " << *sc.run.precision_cap << "\n";
    out << "seed = " << sc.run.seed << "\n";
    out << "trials = " << sc.run.trials << "\n";
    return out.str();
}

}  // namespace ramlab
