// SPDX-License-Identifier: Apache-2.0
// Command-line front end: price, table, greeks, roots and verify.
//
// Every command is a pure function of a resolved parameter object. The same
// object is written into the run manifest, so `--replay` re-runs a command
// from its manifest alone and reproduces the output bit for bit.

#include "hejd/config.hpp"
#include "hejd/errors.hpp"
#include "hejd/gs_inversion.hpp"
#include "hejd/mc_oracle.hpp"
#include "hejd/reference_tables.hpp"
#include "hejd/roots.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#ifndef HEJD_VERSION
#define HEJD_VERSION "0.0.0"
#endif

namespace {

using json = nlohmann::ordered_json;
using hejd::Contract;
using hejd::Quantity;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// ---------------------------------------------------------------- output

using Cell = std::variant<double, std::string>;

struct Column {
    std::string name;
    int text_decimals = 3;  ///< fixed decimals in text mode; < 0 means %.10g
};

struct Report {
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string full_precision(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string text_number(double v, int decimals) {
    if (std::isnan(v)) return "--";
    char buf[64];
    if (decimals < 0) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    }
    return buf;
}

void write_csv(std::ostream& os, const Report& rep) {
    for (std::size_t c = 0; c < rep.columns.size(); ++c) {
        os << (c ? "," : "") << rep.columns[c].name;
    }
    os << '\n';
    for (const auto& row : rep.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) os << ',';
            if (const auto* d = std::get_if<double>(&row[c])) {
                os << full_precision(*d);
            } else {
                os << std::get<std::string>(row[c]);
            }
        }
        os << '\n';
    }
}

void write_text(std::ostream& os, const Report& rep) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(rep.columns.size());
    for (std::size_t c = 0; c < rep.columns.size(); ++c) width[c] = rep.columns[c].name.size();
    for (const auto& row : rep.rows) {
        auto& out = cells.emplace_back();
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (const auto* d = std::get_if<double>(&row[c])) {
                out.push_back(text_number(*d, rep.columns[c].text_decimals));
            } else {
                out.push_back(std::get<std::string>(row[c]));
            }
            width[c] = std::max(width[c], out.back().size());
        }
    }
    auto line = [&](auto&& cell_at) {
        for (std::size_t c = 0; c < width.size(); ++c) {
            const std::string s = cell_at(c);
            if (c) os << "  ";
            os << std::string(width[c] - s.size(), ' ') << s;
        }
        os << '\n';
    };
    line([&](std::size_t c) { return rep.columns[c].name; });
    for (const auto& row : cells) line([&](std::size_t c) { return row[c]; });
}

json report_json(const Report& rep) {
    json rows = json::array();
    for (const auto& row : rep.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (const auto* d = std::get_if<double>(&row[c])) {
                // JSON has no NaN; null marks an undefined ratio.
                obj[rep.columns[c].name] = std::isfinite(*d) ? json(*d) : json(nullptr);
            } else {
                obj[rep.columns[c].name] = std::get<std::string>(row[c]);
            }
        }
        rows.push_back(std::move(obj));
    }
    return rows;
}

// ---------------------------------------------------------------- params

struct Loaded {
    hejd::ContractConfig contract;
    std::string text;
};

Loaded load_contract(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hejd::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return {hejd::parse_config(buf.str(), path), buf.str()};
}

hejd::ContractConfig contract_from(const json& params, const char* key = "config") {
    return hejd::parse_config(params.at(key).get<std::string>(), key);
}

hejd::GsConfig gs_from(const json& params, bool parallel) {
    hejd::GsConfig cfg = hejd::gs_weights(params.at("gs_order").get<int>());
    cfg.parallel = parallel;
    return cfg;
}

// ---------------------------------------------------------------- commands

Report run_price(const json& p) {
    const auto c = contract_from(p);
    const double t = p.at("t").get<double>();
    const double x = p.at("x").get<double>();
    const std::string which = p.at("quantity").get<std::string>();
    const auto gs = gs_from(p, false);
    Report rep;
    if (which == "all") {
        const auto q = hejd::quote_time_domain(c.model, c.spec, t, x, gs, true);
        rep.columns = {{"x", 3},    {"euro", 3},          {"amer", 3},     {"eep", 3},
                       {"eep_diffusion", 3}, {"eep_jump", 3}, {"eep_percent", 2}, {"dc_percent", 2}};
        rep.rows.push_back({x, q.euro, q.amer, q.eep, q.eep_diffusion, q.eep_jump, q.eep_percent(),
                            q.diffusion_percent()});
    } else {
        const Quantity quantity = hejd::parse_quantity(which);
        const double v = hejd::price_time_domain(c.model, c.spec, t, x, quantity, gs);
        rep.columns = {{"x", 3}, {"quantity", 0}, {"value", 3}};
        rep.rows.push_back({x, std::string(hejd::to_string(quantity)), v});
    }
    return rep;
}

std::vector<Column> table_columns() {
    return {{"table", 0},        {"block", 0},       {"lambda", -1},       {"spot", 0},
            {"contract", 0},     {"euro", 3},        {"amer", 3},          {"eep", 3},
            {"eep_percent", 2},  {"dc_percent", 2},  {"ref_euro", 3},      {"ref_amer", 3},
            {"ref_eep", 3},      {"ref_eep_percent", 2}, {"ref_dc_percent", 2}, {"gs_order", 0},
            {"engine_version", 0}};
}

Report run_table(const json& p) {
    const int id = p.at("id").get<int>();
    const auto gs = gs_from(p, true);
    const double nan = std::nan("");
    Report rep;
    rep.columns = table_columns();
    auto push = [&](const std::string& block, double lambda, double spot, Contract contract,
                    const hejd::TimeDomainQuote& q, const std::array<double, 5>& ref) {
        const bool has_eep = q.amer != 0.0;
        rep.rows.push_back({std::to_string(id), block, lambda, spot,
                            std::string(hejd::to_string(contract)), q.euro, q.amer, q.eep,
                            has_eep ? q.eep_percent() : nan, has_eep ? q.diffusion_percent() : nan,
                            ref[0], ref[1], ref[2], ref[3], ref[4],
                            static_cast<double>(gs.order), std::string(HEJD_VERSION)});
    };
    if (id == 1) {
        const auto& table = hejd::ladder_table();
        const double t = table.setup.maturity;
        for (const auto& row : table.rows) {
            const auto model = table.setup.model(row.lambda);
            for (Contract contract : hejd::kContracts) {
                const auto q = hejd::quote_time_domain(model, table.setup.spec(contract), t,
                                                       table.spot, gs);
                const auto& r = row.cells[static_cast<std::size_t>(contract)];
                push("1", row.lambda, table.spot, contract, q, {r.euro, r.amer, nan, nan, r.dc_percent});
            }
        }
        const auto bs = hejd::HejdModel::black_scholes(table.setup.r, table.setup.delta,
                                                       table.setup.sigma);
        for (Contract contract : hejd::kContracts) {
            const auto q =
                hejd::quote_time_domain(bs, table.setup.spec(contract), t, table.spot, gs);
            const auto& r = table.black_scholes[static_cast<std::size_t>(contract)];
            push("bs", 0.0, table.spot, contract, q, {r.euro, r.amer, nan, nan, nan});
        }
        return rep;
    }
    const auto& table = hejd::eep_table(id);
    for (const auto& row : table.rows) {
        const auto model = table.setup.model(row.lambda);
        for (Contract contract : hejd::kContracts) {
            const auto q = hejd::quote_time_domain(model, table.setup.spec(contract),
                                                   table.setup.maturity, row.spot, gs);
            const auto& r = row.cells[static_cast<std::size_t>(contract)];
            push(std::to_string(row.block), row.lambda, row.spot, contract, q,
                 {r.euro, nan, r.eep, r.eep_percent, r.dc_percent});
        }
    }
    return rep;
}

struct Surface {
    std::vector<double> value, delta, gamma;
};

Surface greeks_surface(const hejd::ContractConfig& c, double t, const std::vector<double>& xs,
                       double bump, Quantity quantity, const hejd::GsConfig& gs) {
    Surface s;
    for (double x : xs) {
        const double h = bump * x;
        const double v = hejd::price_time_domain(c.model, c.spec, t, x, quantity, gs);
        const double up = hejd::price_time_domain(c.model, c.spec, t, x + h, quantity, gs);
        const double dn = hejd::price_time_domain(c.model, c.spec, t, x - h, quantity, gs);
        s.value.push_back(v);
        s.delta.push_back(h > 0.0 ? (up - dn) / (2.0 * h) : 0.0);
        s.gamma.push_back(h > 0.0 ? (up - 2.0 * v + dn) / (h * h) : 0.0);
    }
    return s;
}

Report run_greeks(const json& p) {
    const auto c = contract_from(p);
    const double t = p.at("t").get<double>();
    const double lo = p.at("x_lo").get<double>();
    const double hi = p.at("x_hi").get<double>();
    const int n = p.at("n").get<int>();
    const double bump = p.at("bump").get<double>();
    if (!(lo < hi)) throw hejd::ConfigError("greeks requires x_lo < x_hi");
    if (n < 3) throw hejd::ConfigError("greeks requires n >= 3");
    if (!(bump > 0.0) || !(bump < 1.0)) throw hejd::ConfigError("bump must be in (0, 1)");
    const Quantity quantity = hejd::parse_quantity(p.at("quantity").get<std::string>());
    const auto gs = gs_from(p, true);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);

    Surface s = greeks_surface(c, t, xs, bump, quantity, gs);
    if (p.contains("diff_config")) {
        const Surface other = greeks_surface(contract_from(p, "diff_config"), t, xs, bump, quantity, gs);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            s.value[i] -= other.value[i];
            s.delta[i] -= other.delta[i];
            s.gamma[i] -= other.gamma[i];
        }
    }
    Report rep;
    rep.columns = {{"x", 3}, {"value", 6}, {"delta", 6}, {"gamma", 6}};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        rep.rows.push_back({xs[i], s.value[i], s.delta[i], s.gamma[i]});
    }
    return rep;
}

Report run_roots(const json& p) {
    const auto c = contract_from(p);
    const double alpha = p.at("alpha").get<double>();
    const hejd::RootSet roots = hejd::find_roots(c.model, alpha);
    Report rep;
    rep.columns = {{"kind", 0},         {"index", 0},         {"root", -1},
                   {"bracket_lower", -1}, {"bracket_upper", -1}, {"residual", -1}};
    auto add = [&](const char* kind, const std::vector<double>& rs,
                   const std::vector<hejd::RootBracket>& br) {
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const double residual = hejd::laplace_exponent(c.model, rs[i]) - alpha;
            rep.rows.push_back({std::string(kind), std::to_string(i + 1), rs[i], br[i].lower,
                                br[i].upper, residual});
        }
    };
    add("beta", roots.betas, roots.beta_brackets);
    add("gamma", roots.gammas, roots.gamma_brackets);
    return rep;
}

Report run_verify(const json& p) {
    const auto c = contract_from(p);
    const double t = p.at("t").get<double>();
    const double x = p.at("x").get<double>();
    hejd::PathConfig mc;
    mc.n_paths = p.at("paths").get<std::uint64_t>();
    mc.dt = p.at("dt").get<double>();
    mc.seed = p.at("seed").get<std::uint64_t>();
    mc.threads = p.at("threads").get<unsigned>();
    const double engine =
        hejd::price_time_domain(c.model, c.spec, t, x, Quantity::euro, gs_from(p, false));
    const auto step = hejd::mc_euro_step_price(c.model, c.spec, t, x, mc);
    const auto dual = hejd::verify_duality(c.model, c.spec, t, x, mc);
    Report rep;
    rep.columns = {{"check", 0}, {"reference", 3}, {"estimate", 3}, {"std_error", 4}, {"z_score", 2}};
    rep.rows.push_back({std::string("euro_step"), engine, step.value, step.std_error,
                        (step.value - engine) / step.std_error});
    rep.rows.push_back({std::string("duality"), dual.call.value, dual.put.value, dual.pooled_se,
                        dual.z_score});
    return rep;
}

Report dispatch(const std::string& command, const json& params) {
    if (command == "price") return run_price(params);
    if (command == "table") return run_table(params);
    if (command == "greeks") return run_greeks(params);
    if (command == "roots") return run_roots(params);
    if (command == "verify") return run_verify(params);
    throw hejd::ConfigError("unknown command '" + command + "'");
}

// ---------------------------------------------------------------- manifest

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json make_manifest(const std::string& command, const json& params, const std::string& format,
                   const std::string& started) {
    json m;
    m["engine_version"] = HEJD_VERSION;
    m["command"] = command;
    m["format"] = format;
    m["params"] = params;
    if (params.contains("gs_order")) m["gs_order"] = params["gs_order"];
    if (params.contains("config")) {
        // Model and contract after defaults are applied.
        const auto c = contract_from(params);
        m["resolved"] = hejd::serialize_config(c.model, c.spec);
    }
    m["simd_variant"] = std::string(hejd::simd::to_string(hejd::simd::active_variant()));
    m["started_at"] = started;
    m["finished_at"] = utc_timestamp();
    return m;
}

std::string error_type(const hejd::Error& e) {
    if (dynamic_cast<const hejd::ModelError*>(&e)) return "ModelError";
    if (dynamic_cast<const hejd::ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const hejd::OrderError*>(&e)) return "OrderError";
    if (dynamic_cast<const hejd::BudgetError*>(&e)) return "BudgetError";
    if (dynamic_cast<const hejd::PoleError*>(&e)) return "PoleError";
    if (dynamic_cast<const hejd::BracketError*>(&e)) return "BracketError";
    if (dynamic_cast<const hejd::ConvergenceError*>(&e)) return "ConvergenceError";
    if (dynamic_cast<const hejd::SingularSystemError*>(&e)) return "SingularSystemError";
    if (dynamic_cast<const hejd::NoBoundaryError*>(&e)) return "NoBoundaryError";
    if (dynamic_cast<const hejd::QuadratureError*>(&e)) return "QuadratureError";
    return "Error";
}

int report_error(const std::string& format, const std::string& type, const std::string& message,
                 int code) {
    if (format == "json") {
        json out;
        out["error"] = {{"type", type}, {"message", message}, {"exit_code", code}};
        std::cout << out.dump(2) << '\n';
    }
    std::cerr << "hejd: " << type << ": " << message << '\n';
    return code;
}

struct Invocation {
    std::string command;
    json params;
    std::string format = "text";
    std::string out_path;
    std::string manifest_path;
};

int execute(const Invocation& inv) {
    const std::string started = utc_timestamp();
    try {
        const Report rep = dispatch(inv.command, inv.params);
        const json manifest = make_manifest(inv.command, inv.params, inv.format, started);
        std::ostringstream body;
        if (inv.format == "json") {
            json out;
            out["command"] = inv.command;
            out["columns"] = json::array();
            for (const auto& c : rep.columns) out["columns"].push_back(c.name);
            out["rows"] = report_json(rep);
            out["manifest"] = manifest;
            body << out.dump(2) << '\n';
        } else if (inv.format == "csv") {
            write_csv(body, rep);
        } else {
            write_text(body, rep);
        }
        if (inv.out_path.empty()) {
            std::cout << body.str();
        } else {
            std::ofstream f(inv.out_path);
            if (!f) throw hejd::ConfigError("cannot write '" + inv.out_path + "'");
            f << body.str();
        }
        if (!inv.manifest_path.empty()) {
            std::ofstream f(inv.manifest_path);
            if (!f) throw hejd::ConfigError("cannot write '" + inv.manifest_path + "'");
            f << manifest.dump(2) << '\n';
        }
        return 0;
    } catch (const hejd::Error& e) {
        return report_error(inv.format, error_type(e), e.what(),
                            e.is_input_error() ? kExitConfig : kExitNumerical);
    } catch (const json::exception& e) {
        return report_error(inv.format, "ConfigError", e.what(), kExitConfig);
    }
}

Invocation replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hejd::ConfigError("cannot open manifest '" + path + "'");
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw hejd::ConfigError("manifest '" + path + "' is not valid JSON: " + e.what());
    }
    Invocation inv;
    inv.command = m.at("command").get<std::string>();
    inv.params = m.at("params");
    inv.format = m.value("format", "text");
    return inv;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Step option pricing engine for hyper-exponential jump-diffusion markets"};
    app.set_version_flag("--version", HEJD_VERSION);
    app.require_subcommand(0, 1);

    Invocation inv;
    std::string replay_path;
    app.add_option("--replay", replay_path, "Re-run the command recorded in a manifest file");

    int gs_order = hejd::kDefaultGsOrder;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--format", inv.format, "Output format")
            ->check(CLI::IsMember({"text", "json", "csv"}));
        sub->add_option("--out", inv.out_path, "Write the output to a file instead of stdout");
        sub->add_option("--manifest", inv.manifest_path, "Write the run manifest to a file");
    };
    auto add_gs = [&](CLI::App* sub) {
        sub->add_option("--gs-order", gs_order, "Gaver-Stehfest order N (1 to 10)");
    };

    std::string config_path, diff_path, quantity = "all";
    double t = 1.0, x = 0.0, x_lo = 0.0, x_hi = 0.0, bump = 1e-3, alpha = 0.0;
    int n = 0, table_id = 0;
    hejd::PathConfig mc_defaults;
    std::uint64_t paths = mc_defaults.n_paths, seed = mc_defaults.seed;
    double dt = mc_defaults.dt;
    unsigned threads = 0;

    auto* price = app.add_subcommand("price", "Price one contract at one spot");
    price->add_option("config", config_path, "Model and contract file")->required();
    price->add_option("t", t, "Maturity in years")->required();
    price->add_option("x", x, "Spot price")->required();
    price->add_option("quantity", quantity, "euro, amer, eep, eep_diffusion, eep_jump or all");
    add_gs(price);
    add_common(price);

    auto* table = app.add_subcommand("table", "Reproduce a reference table (ids 1 to 5)");
    table->add_option("id", table_id, "Table id")->required();
    add_gs(table);
    add_common(table);
    inv.format = "text";

    auto* greeks = app.add_subcommand("greeks", "Value, delta and gamma over a spot grid");
    greeks->add_option("config", config_path, "Model and contract file")->required();
    greeks->add_option("t", t, "Maturity in years")->required();
    greeks->add_option("x_lo", x_lo, "Lowest spot")->required();
    greeks->add_option("x_hi", x_hi, "Highest spot")->required();
    greeks->add_option("n", n, "Number of grid points")->required();
    greeks->add_option("quantity", quantity, "euro, amer, eep, eep_diffusion or eep_jump");
    greeks->add_option("--bump", bump, "Relative finite-difference bump");
    greeks->add_option("--diff-against", diff_path, "Subtract the surface of a second config");
    add_gs(greeks);
    add_common(greeks);

    auto* roots = app.add_subcommand("roots", "Roots of Phi(theta) = alpha with their brackets");
    roots->add_option("config", config_path, "Model file")->required();
    roots->add_option("alpha", alpha, "Right-hand side alpha > 0")->required();
    add_common(roots);

    auto* verify = app.add_subcommand("verify", "Compare the engine against Monte Carlo");
    verify->add_option("config", config_path, "Model and contract file")->required();
    verify->add_option("t", t, "Maturity in years")->required();
    verify->add_option("x", x, "Spot price")->required();
    verify->add_option("--paths", paths, "Number of simulated paths (an antithetic pair is two paths)");
    verify->add_option("--dt", dt, "Time step in years");
    verify->add_option("--seed", seed, "Random seed");
    verify->add_option("--threads", threads, "Worker threads (0 = all cores)");
    add_gs(verify);
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (!replay_path.empty()) {
            const std::string out = inv.out_path, manifest = inv.manifest_path;
            inv = replay(replay_path);
            inv.out_path = out;
            inv.manifest_path = manifest;
            return execute(inv);
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return kExitConfig;
        }
        CLI::App* sub = app.get_subcommands().front();
        inv.command = sub->get_name();
        json& p = inv.params;
        if (sub != table) p["config"] = load_contract(config_path).text;
        if (sub != roots) p["gs_order"] = gs_order;
        if (sub == price) {
            p["t"] = t;
            p["x"] = x;
            p["quantity"] = quantity;
        } else if (sub == table) {
            p["id"] = table_id;
        } else if (sub == greeks) {
            p["t"] = t;
            p["x_lo"] = x_lo;
            p["x_hi"] = x_hi;
            p["n"] = n;
            p["quantity"] = quantity == "all" ? "euro" : quantity;
            p["bump"] = bump;
            if (!diff_path.empty()) p["diff_config"] = load_contract(diff_path).text;
        } else if (sub == roots) {
            p["alpha"] = alpha;
        } else if (sub == verify) {
            p["t"] = t;
            p["x"] = x;
            p["paths"] = paths;
            p["dt"] = dt;
            p["seed"] = seed;
            p["threads"] = threads;
        }
        return execute(inv);
    } catch (const hejd::Error& e) {
        return report_error(inv.format, error_type(e), e.what(),
                            e.is_input_error() ? kExitConfig : kExitNumerical);
    }
}
