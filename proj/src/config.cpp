// SPDX-License-Identifier: Apache-2.0
#include "hejd/config.hpp"

#include "hejd/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace hejd {

namespace {

constexpr std::string_view kKeys[] = {"r", "delta", "sigma", "lambda", "p",      "xi",
                                      "q", "eta",   "K",     "L",      "rho_L", "gamma_L"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class Parser {
public:
    explicit Parser(std::string_view source) : source_(source) {}

    [[noreturn]] void fail(int line, const std::string& what) const {
        throw ConfigError(std::string(source_) + ":" + std::to_string(line) + ": " + what);
    }

    double number(std::string_view token, int line) const {
        const std::string s(trim(token));
        if (s.empty()) fail(line, "empty number");
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || errno == ERANGE) fail(line, "invalid number '" + s + "'");
        return v;
    }

    std::vector<double> numbers(std::string_view value, int line) const {
        std::vector<double> out;
        std::size_t start = 0;
        while (true) {
            const auto comma = value.find(',', start);
            out.push_back(number(value.substr(start, comma - start), line));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return out;
    }

private:
    std::string_view source_;
};

std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ContractConfig parse_config(std::string_view text, std::string_view source) {
    const Parser parser(source);
    std::map<std::string, std::pair<std::string, int>, std::less<>> entries;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) parser.fail(line_no, "expected 'key = value'");
        std::string_view key = trim(line.substr(0, eq));
        if (key.size() > 2 && key.ends_with("[]")) key.remove_suffix(2);
        bool known = false;
        for (auto k : kKeys) known = known || k == key;
        if (!known) parser.fail(line_no, "unknown key '" + std::string(key) + "'");
        if (entries.contains(key)) parser.fail(line_no, "duplicate key '" + std::string(key) + "'");
        entries.emplace(std::string(key), std::make_pair(std::string(trim(line.substr(eq + 1))), line_no));
    }

    auto scalar = [&](std::string_view key) -> std::optional<double> {
        const auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        return parser.number(it->second.first, it->second.second);
    };
    auto required = [&](std::string_view key) {
        const auto v = scalar(key);
        if (!v) throw ConfigError(std::string(source) + ": missing required key '" + std::string(key) + "'");
        return *v;
    };
    auto list = [&](std::string_view key) {
        const auto it = entries.find(key);
        if (it == entries.end()) return std::vector<double>{};
        return parser.numbers(it->second.first, it->second.second);
    };
    auto mixture = [&](std::string_view weights_key, std::string_view rates_key) {
        const std::vector<double> w = list(weights_key);
        const std::vector<double> a = list(rates_key);
        if (w.size() != a.size()) {
            throw ConfigError(std::string(source) + ": '" + std::string(weights_key) + "' and '" +
                              std::string(rates_key) + "' must have the same length");
        }
        std::vector<JumpComponent> out;
        for (std::size_t i = 0; i < w.size(); ++i) out.push_back({w[i], a[i]});
        return out;
    };

    const double r = required("r");
    const double delta = required("delta");
    const double sigma = required("sigma");
    const double strike = required("K");
    const double lambda = scalar("lambda").value_or(0.0);
    std::vector<JumpComponent> up = mixture("p", "xi");
    std::vector<JumpComponent> down = mixture("q", "eta");
    if (lambda > 0.0 && up.empty() && down.empty()) {
        throw ConfigError(std::string(source) + ": lambda > 0 requires p, xi, q and eta");
    }

    ContractConfig cfg{HejdModel(r, delta, sigma, lambda, std::move(up), std::move(down)), {}};
    cfg.spec.strike = strike;
    cfg.spec.barrier = scalar("L").value_or(0.0);
    cfg.spec.knock_rate = scalar("rho_L").value_or(0.0);
    cfg.spec.seasoning = scalar("gamma_L").value_or(0.0);
    cfg.spec.validate();
    return cfg;
}

ContractConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string serialize_config(const HejdModel& model, const DownOutStepSpec& spec) {
    std::ostringstream os;
    auto join = [](std::span<const JumpComponent> comps, bool weights) {
        std::string s;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (i > 0) s += ", ";
            s += format(weights ? comps[i].weight : comps[i].rate);
        }
        return s;
    };
    os << "r = " << format(model.r()) << '\n'
       << "delta = " << format(model.delta()) << '\n'
       << "sigma = " << format(model.sigma()) << '\n'
       << "lambda = " << format(model.lambda()) << '\n';
    if (!model.up().empty()) {
        os << "p = " << join(model.up(), true) << '\n' << "xi = " << join(model.up(), false) << '\n';
    }
    if (!model.down().empty()) {
        os << "q = " << join(model.down(), true) << '\n'
           << "eta = " << join(model.down(), false) << '\n';
    }
    os << "K = " << format(spec.strike) << '\n'
       << "L = " << format(spec.barrier) << '\n'
       << "rho_L = " << format(spec.knock_rate) << '\n'
       << "gamma_L = " << format(spec.seasoning) << '\n';
    return os.str();
}

}  // namespace hejd
