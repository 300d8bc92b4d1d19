#pragma once

#include <array>
#include <cmath>
#include <string>

#include <json.hpp>

#include "hpa/errors.hpp"

namespace hpa {

/// Rate and affinity constants of the four-variable CRH/ACTH/GR/CORT model.
/// All strictly positive. Time unit is minutes, concentrations are scaled.
struct ModelParams {
    double a1 = 0; ///< CRH production (circadian + stress drive)
    double a2 = 0; ///< CRH inhibition constant
    double a3 = 0; ///< CRH degradation rate
    double b1 = 0; ///< ACTH production rate
    double b2 = 0; ///< ACTH inhibition constant
    double b3 = 0; ///< ACTH degradation rate
    double c1 = 0; ///< GR dimerization gain
    double c2 = 0; ///< GR binding affinity constant
    double c3 = 0; ///< GR baseline production
    double c4 = 0; ///< GR degradation rate
    double d1 = 0; ///< CORT production rate
    double d2 = 0; ///< CORT degradation rate

    void validate() const {
        const std::array<std::pair<const char*, double>, 12> fields{{
            {"a1", a1}, {"a2", a2}, {"a3", a3}, {"b1", b1}, {"b2", b2}, {"b3", b3},
            {"c1", c1}, {"c2", c2}, {"c3", c3}, {"c4", c4}, {"d1", d1}, {"d2", d2}}};
        for (const auto& [name, v] : fields) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string("ModelParams::") + name + " must be a positive real");
        }
    }

    /// Reference parameter set used throughout the test suite (scaled units).
    static ModelParams gupta() {
        return ModelParams{0.1, 0.1, 1.0, 0.1, 0.1, 10.0, 1.0, 0.001, 0.05, 0.9, 1.0, 1.0};
    }
};

/// Concentrations (x1..x4) at one instant.
struct State {
    double crh = 0;
    double acth = 0;
    double gr = 0;
    double cort = 0;

    std::array<double, 4> to_array() const { return {crh, acth, gr, cort}; }
    static State from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

    friend bool operator==(const State&, const State&) = default;
};

inline void to_json(nlohmann::ordered_json& j, const ModelParams& p) {
    j = nlohmann::ordered_json{{"a1", p.a1}, {"a2", p.a2}, {"a3", p.a3}, {"b1", p.b1},
                               {"b2", p.b2}, {"b3", p.b3}, {"c1", p.c1}, {"c2", p.c2},
                               {"c3", p.c3}, {"c4", p.c4}, {"d1", p.d1}, {"d2", p.d2}};
}

inline void from_json(const nlohmann::json& j, ModelParams& p) {
    if (!j.is_object()) throw ConfigError("params must be a JSON object");
    static const char* keys[] = {"a1", "a2", "a3", "b1", "b2", "b3",
                                 "c1", "c2", "c3", "c4", "d1", "d2"};
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || (key == k);
        if (!known) throw ConfigError("unknown parameter key: " + key);
        if (!value.is_number()) throw ConfigError("parameter " + key + " must be a number");
    }
    double* dst[] = {&p.a1, &p.a2, &p.a3, &p.b1, &p.b2, &p.b3,
                     &p.c1, &p.c2, &p.c3, &p.c4, &p.d1, &p.d2};
    for (int i = 0; i < 12; ++i) {
        if (!j.contains(keys[i])) throw ConfigError(std::string("missing parameter: ") + keys[i]);
        *dst[i] = j.at(keys[i]).get<double>();
    }
    p.validate();
}

inline void to_json(nlohmann::ordered_json& j, const State& s) {
    j = nlohmann::ordered_json{{"crh", s.crh}, {"acth", s.acth}, {"gr", s.gr}, {"cort", s.cort}};
}

inline void from_json(const nlohmann::json& j, State& s) {
    s.crh = j.at("crh").get<double>();
    s.acth = j.at("acth").get<double>();
    s.gr = j.at("gr").get<double>();
    s.cort = j.at("cort").get<double>();
}

} // namespace hpa
