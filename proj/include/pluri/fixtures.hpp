#pragma once

// Frozen-constant fixtures: a flat JSON object mapping inequality keys to
// calibrated constants (1.05 x the worst ratio measured on the reference
// seeds). Tests assert non-regression against these values.

#include "pluri/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>

namespace pluri {

class Fixtures {
public:
    static std::string default_path() {
        if (const char* env = std::getenv("PLURI_FIXTURES")) return env;
        return "fixtures/estimate-constants.json";
    }

    static Fixtures load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ModelError("fixtures: cannot open " + path);
        nlohmann::json j;
        in >> j;
        Fixtures f;
        for (auto it = j.begin(); it != j.end(); ++it)
            f.values_[it.key()] = it.value().get<double>();
        return f;
    }

    void save(const std::string& path) const {
        nlohmann::json j(nlohmann::json::value_t::object);
        for (const auto& [k, v] : values_) j[k] = v;
        std::ofstream out(path);
        if (!out) throw ModelError("fixtures: cannot write " + path);
        out << j.dump(2) << "\n";
    }

    double at(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ModelError("fixtures: missing key " + key);
        return it->second;
    }
    std::optional<double> maybe(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }
    void set(const std::string& key, double v) { values_[key] = v; }
    const std::map<std::string, double>& all() const { return values_; }
    bool empty() const { return values_.empty(); }

private:
    std::map<std::string, double> values_;
};

}  // namespace pluri
