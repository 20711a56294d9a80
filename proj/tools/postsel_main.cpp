// postsel command-line tool: post-selection interval reports, simulation
// runners, SVG charts, and a built-in invariant suite.
//
// Exit codes: 0 ok, 2 bad input (flags, config schema, malformed CSV),
// 3 contract violation (plain CI under an e-value procedure, bad weights,
// broken inverse pair), 4 internal failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "postsel/postsel.hpp"

using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_bad_input = 2;
constexpr int exit_contract = 3;
constexpr int exit_internal = 4;

struct cli_input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string iso_utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cli_input_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw cli_input_error("config is not valid JSON: " + std::string(e.what()));
    }
    return j;
}

/// Strict schema mode: every present key must be known, every required key
/// present, and "schema" must equal 1.
void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::set<std::string>& required, const std::string& where) {
    if (!j.is_object()) throw cli_input_error(where + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw cli_input_error(where + ": unknown field \"" + it.key() + "\"");
    }
    for (const auto& key : required) {
        if (!j.contains(key)) throw cli_input_error(where + ": missing field \"" + key + "\"");
    }
    if (required.count("schema") && (!j["schema"].is_number_integer() || j["schema"] != 1))
        throw cli_input_error(where + ": unsupported schema version (expected 1)");
}

double get_num(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw cli_input_error(where + ": field \"" + key + "\" must be a number");
    return j[key].get<double>();
}

std::size_t get_count(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0)
        throw cli_input_error(where + ": field \"" + key + "\" must be a nonnegative integer");
    return j[key].get<std::size_t>();
}

std::vector<double> get_num_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw cli_input_error(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw cli_input_error(where + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    if (path == "-" || path.empty()) {
        std::cout << text;
        return;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cli_input_error("cannot write to: " + path);
    out << text;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

postsel::eci_family parse_eci_spec(const json& spec, const std::string& where) {
    check_keys(spec, {"type", "sample_mean", "n", "range", "alpha_prime", "e", "null", "e_plus",
                      "e_minus", "d0", "d1", "bracket"},
               {"type"}, where);
    const std::string type = spec["type"].is_string() ? spec["type"].get<std::string>() : "";
    auto hoeffding_spec = [&]() {
        auto range = get_num_array(spec.contains("range") ? spec["range"] : json(), where + ".range");
        if (range.size() != 2) throw cli_input_error(where + ": range must be [lo, hi]");
        return postsel::hoeffding_batch_spec{get_num(spec, "sample_mean", where),
                                             get_count(spec, "n", where), range[0], range[1]};
    };
    if (type == "hoeffding_generalized")
        return postsel::hoeffding_generalized_eci(hoeffding_spec(),
                                                  get_num(spec, "alpha_prime", where));
    if (type == "hoeffding_plain") return postsel::hoeffding_plain_ci(hoeffding_spec());
    if (type == "indicator") {
        auto null = get_num_array(spec.contains("null") ? spec["null"] : json(), where + ".null");
        if (null.size() != 2) throw cli_input_error(where + ": null must be [lo, hi]");
        return postsel::indicator_eci(get_num(spec, "e", where), null[0], null[1]);
    }
    if (type == "directional")
        return postsel::directional_eci(get_num(spec, "e_plus", where),
                                        get_num(spec, "e_minus", where));
    if (type == "ui_gaussian") {
        auto d0 = get_num_array(spec.contains("d0") ? spec["d0"] : json(), where + ".d0");
        auto d1 = get_num_array(spec.contains("d1") ? spec["d1"] : json(), where + ".d1");
        auto family = postsel::ui_gaussian_family(d0, d1);
        postsel::root_search search{};
        if (spec.contains("bracket")) {
            auto b = get_num_array(spec["bracket"], where + ".bracket");
            if (b.size() != 2) throw cli_input_error(where + ": bracket must be [lo, hi]");
            search.bracket_lo = b[0];
            search.bracket_hi = b[1];
        } else {
            double mu0 = 0.0;
            for (double x : d0) mu0 += x;
            mu0 /= static_cast<double>(d0.size());
            const double span = 10.0 + 10.0 / std::sqrt(static_cast<double>(d0.size()));
            search.bracket_lo = mu0 - span;
            search.bracket_hi = mu0 + span;
        }
        return postsel::eci_from_evalue(family, search);
    }
    throw cli_input_error(where + ": unknown eci type \"" + type + "\"");
}

postsel::selection_outcome parse_selection(const json& sel, double delta) {
    check_keys(sel, {"indices", "r_min", "rule", "pvalues", "evalues"}, {}, "selection");
    if (sel.contains("rule")) {
        const std::string rule = sel["rule"].is_string() ? sel["rule"].get<std::string>() : "";
        if (rule == "p_threshold")
            return postsel::p_threshold_select(
                get_num_array(sel.contains("pvalues") ? sel["pvalues"] : json(), "selection.pvalues"),
                delta);
        if (rule == "bh")
            return postsel::bh_select(
                get_num_array(sel.contains("pvalues") ? sel["pvalues"] : json(), "selection.pvalues"),
                delta);
        if (rule == "ebh")
            return postsel::e_bh_select(
                get_num_array(sel.contains("evalues") ? sel["evalues"] : json(), "selection.evalues"),
                delta);
        throw cli_input_error("selection: unknown rule \"" + rule + "\"");
    }
    if (!sel.contains("indices"))
        throw cli_input_error("selection: needs either \"indices\" or a \"rule\"");
    postsel::selection_outcome out;
    out.rule_label = "explicit";
    for (const auto& v : sel["indices"]) {
        if (!v.is_number_integer() || v.get<long long>() < 1)
            throw cli_input_error("selection.indices: expected positive integers");
        out.selected.push_back(v.get<std::size_t>());
    }
    std::sort(out.selected.begin(), out.selected.end());
    if (sel.contains("r_min")) {
        out.r_min.emplace();
        if (sel["r_min"].is_number_integer()) {
            for (std::size_t i : out.selected) (*out.r_min)[i] = sel["r_min"].get<std::size_t>();
        } else if (sel["r_min"].is_object()) {
            for (auto it = sel["r_min"].begin(); it != sel["r_min"].end(); ++it)
                (*out.r_min)[static_cast<std::size_t>(std::stoull(it.key()))] =
                    it.value().get<std::size_t>();
        } else {
            throw cli_input_error("selection.r_min: expected integer or object");
        }
    }
    return out;
}

int cmd_report(const std::string& config_path, const std::string& procedure,
               std::optional<double> delta_flag, const std::string& out_path) {
    const json cfg = load_json_file(config_path);
    check_keys(cfg, {"schema", "K", "delta", "items", "selection", "weights"},
               {"schema", "K", "items", "selection"}, "report config");
    const std::size_t K = get_count(cfg, "K", "report config");
    double delta = 0.0;
    if (delta_flag)
        delta = *delta_flag;
    else if (cfg.contains("delta"))
        delta = get_num(cfg, "delta", "report config");
    else
        throw cli_input_error("report: delta missing (use --delta or config field)");

    if (!cfg["items"].is_array() || cfg["items"].size() != K)
        throw cli_input_error("report config: items must be an array of exactly K eci specs");
    std::vector<postsel::eci_family> families;
    families.reserve(K);
    for (std::size_t i = 0; i < K; ++i)
        families.push_back(parse_eci_spec(cfg["items"][i], "items[" + std::to_string(i) + "]"));

    const postsel::selection_outcome sel = parse_selection(cfg["selection"], delta);

    postsel::procedure_report report;
    if (procedure == "eby") {
        report = postsel::e_by(families, sel, delta, K);
    } else if (procedure == "weighted-eby") {
        if (!cfg.contains("weights"))
            throw cli_input_error("report: weighted-eby needs a \"weights\" array");
        postsel::weight_vector w{get_num_array(cfg["weights"], "weights")};
        report = postsel::weighted_e_by(families, sel, delta, K, w);
    } else if (procedure == "by-ind") {
        report = postsel::by_independent(families, sel, delta, K);
    } else if (procedure == "by-dep") {
        report = postsel::by_dependent(families, sel, delta, K);
    } else {
        throw cli_input_error("report: unknown procedure \"" + procedure + "\"");
    }

    std::string csv = "index,alpha,region\n";
    for (const auto& entry : report.entries) {
        csv += postsel::csv_line({std::to_string(entry.index), postsel::fmt_g17(entry.alpha),
                                  postsel::region_to_json(entry.region).dump()});
    }
    write_text_file(out_path, csv);
    return exit_ok;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

std::vector<std::size_t> parse_count_list(const json& v, const std::string& where) {
    std::vector<std::size_t> out;
    if (v.is_number_integer()) {
        out.push_back(v.get<std::size_t>());
    } else if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_number_integer() || e.get<long long>() < 1)
                throw cli_input_error(where + ": expected positive integers");
            out.push_back(e.get<std::size_t>());
        }
    } else {
        throw cli_input_error(where + ": expected an integer or array of integers");
    }
    if (out.empty()) throw cli_input_error(where + ": empty list");
    return out;
}

std::vector<double> parse_num_list(const json& v, const std::string& where) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
    } else if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_number()) throw cli_input_error(where + ": expected numbers");
            out.push_back(e.get<double>());
        }
    } else {
        throw cli_input_error(where + ": expected a number or array of numbers");
    }
    if (out.empty()) throw cli_input_error(where + ": empty list");
    return out;
}

int cmd_simulate(const std::string& kind, const std::string& config_path,
                 const std::string& out_path, std::optional<std::uint64_t> seed_flag,
                 std::optional<std::size_t> reps_flag, unsigned threads,
                 std::optional<std::string> pvalue_mode_flag) {
    json cfg = load_json_file(config_path);
    const std::string started = iso_utc_now();
    std::string csv;
    std::uint64_t master_seed = 0;

    if (kind == "fig2") {
        check_keys(cfg,
                   {"schema", "kind", "K", "n", "sigma", "delta", "setting", "reps", "master_seed",
                    "pvalue_mode"},
                   {"schema", "kind", "K", "n", "delta", "setting", "reps", "master_seed"},
                   "fig2 config");
        if (cfg["kind"] != "fig2") throw cli_input_error("config kind does not match --kind fig2");
        const auto k_values = parse_count_list(cfg["K"], "fig2.K");
        postsel::fig2_config base;
        base.n = get_count(cfg, "n", "fig2");
        base.sigma = cfg.contains("sigma") ? get_num(cfg, "sigma", "fig2") : 100.0;
        base.delta = get_num(cfg, "delta", "fig2");
        const std::string setting = cfg["setting"].is_string() ? cfg["setting"].get<std::string>() : "";
        if (setting == "independent")
            base.setting = postsel::fig2_setting::independent;
        else if (setting == "dependent")
            base.setting = postsel::fig2_setting::dependent;
        else
            throw cli_input_error("fig2.setting: must be \"independent\" or \"dependent\"");
        base.reps = reps_flag ? *reps_flag : get_count(cfg, "reps", "fig2");
        base.master_seed = seed_flag ? *seed_flag : static_cast<std::uint64_t>(
                                                        get_count(cfg, "master_seed", "fig2"));
        std::string mode_name = "consistent";
        if (cfg.contains("pvalue_mode")) mode_name = cfg["pvalue_mode"].get<std::string>();
        if (pvalue_mode_flag) mode_name = *pvalue_mode_flag;
        postsel::pvalue_mode pmode;
        if (mode_name == "consistent")
            pmode = postsel::pvalue_mode::consistent;
        else if (mode_name == "paper")
            pmode = postsel::pvalue_mode::paper;
        else
            throw cli_input_error("pvalue mode must be \"consistent\" or \"paper\"");
        master_seed = base.master_seed;

        csv = "setting,K,method,fcr_mean,fcr_se,width_mean,width_se,reps,seed\n";
        for (std::size_t k : k_values) {
            postsel::fig2_config c = base;
            c.K = k;
            for (const auto& row : postsel::run_fig2(c, pmode, threads)) {
                csv += postsel::csv_line({row.setting, std::to_string(row.K), row.method,
                                          postsel::fmt_g17(row.fcr_mean),
                                          postsel::fmt_g17(row.fcr_se),
                                          postsel::fmt_g17(row.width_mean),
                                          postsel::fmt_g17(row.width_se), std::to_string(row.reps),
                                          std::to_string(row.seed)});
            }
        }
    } else if (kind == "sharpness") {
        check_keys(cfg,
                   {"schema", "kind", "K", "gamma", "delta", "epsilon", "reps", "master_seed",
                    "mode", "path_step"},
                   {"schema", "kind", "K", "gamma", "delta", "epsilon", "reps", "master_seed"},
                   "sharpness config");
        if (cfg["kind"] != "sharpness")
            throw cli_input_error("config kind does not match --kind sharpness");
        const auto epsilons = parse_num_list(cfg["epsilon"], "sharpness.epsilon");
        postsel::sharpness_config base;
        base.K = get_count(cfg, "K", "sharpness");
        base.gamma = get_num(cfg, "gamma", "sharpness");
        base.delta = get_num(cfg, "delta", "sharpness");
        base.reps = reps_flag ? *reps_flag : get_count(cfg, "reps", "sharpness");
        base.master_seed = seed_flag ? *seed_flag : static_cast<std::uint64_t>(get_count(
                                                        cfg, "master_seed", "sharpness"));
        std::string mode_name = "exact_bernoulli";
        if (cfg.contains("mode")) mode_name = cfg["mode"].get<std::string>();
        if (mode_name == "exact_bernoulli")
            base.mode = postsel::sharpness_mode::exact_bernoulli;
        else if (mode_name == "discretized_path")
            base.mode = postsel::sharpness_mode::discretized_path;
        else
            throw cli_input_error("sharpness.mode: unknown mode \"" + mode_name + "\"");
        if (cfg.contains("path_step")) base.path_step = get_num(cfg, "path_step", "sharpness");
        master_seed = base.master_seed;

        csv = "epsilon,K,gamma,delta,mode,fcr_mean,fcr_se,reps,seed\n";
        for (double eps : epsilons) {
            postsel::sharpness_config c = base;
            c.epsilon = eps;
            const auto ms = postsel::run_sharpness(c, threads);
            csv += postsel::csv_line({postsel::fmt_g17(eps), std::to_string(c.K),
                                      postsel::fmt_g17(c.gamma), postsel::fmt_g17(c.delta),
                                      mode_name, postsel::fmt_g17(ms.mean),
                                      postsel::fmt_g17(ms.std_err), std::to_string(ms.reps),
                                      std::to_string(c.master_seed)});
        }
    } else {
        throw cli_input_error("simulate: unknown kind \"" + kind + "\"");
    }

    write_text_file(out_path, csv);
    if (out_path != "-" && !out_path.empty()) {
        json manifest;
        manifest["schema"] = 1;
        manifest["command"] = "simulate";
        manifest["kind"] = kind;
        manifest["config_hash"] = postsel::fnv1a_hex(cfg.dump());
        manifest["master_seed"] = master_seed;
        manifest["tool_version"] = postsel::version_string;
        manifest["started"] = started;
        manifest["finished"] = iso_utc_now();
        write_text_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

int cmd_plot(const std::string& csv_path, const std::string& out_path, const std::string& x_col,
             const std::string& y_col, const std::string& series_col) {
    std::ifstream in(csv_path);
    if (!in) throw cli_input_error("cannot open CSV: " + csv_path);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw cli_input_error("CSV is empty");
    const auto header = split_csv_row(line);
    auto col_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw cli_input_error("CSV has no column \"" + name + "\"");
    };
    const std::size_t xi = col_index(x_col), yi = col_index(y_col), si = col_index(series_col);

    std::vector<std::string> series_order;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = split_csv_row(line);
        if (row.size() != header.size()) throw cli_input_error("CSV row width mismatch");
        double x, y;
        try {
            x = std::stod(row[xi]);
            y = std::stod(row[yi]);
        } catch (...) {
            throw cli_input_error("CSV: non-numeric value in plotted column");
        }
        if (std::isnan(x) || std::isnan(y)) continue;
        const std::string& key = row[si];
        if (!series.count(key)) series_order.push_back(key);
        series[key].emplace_back(x, y);
    }
    if (series.empty()) throw cli_input_error("CSV has no plottable data rows");

    double xmin = postsel::pos_inf, xmax = postsel::neg_inf;
    double ymin = postsel::pos_inf, ymax = postsel::neg_inf;
    for (const auto& [_, pts] : series) {
        for (const auto& [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin == xmax) { xmin -= 1.0; xmax += 1.0; }
    if (ymin == ymax) { ymin -= 1.0; ymax += 1.0; }
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    const double w = 640, h = 420, ml = 75, mr = 150, mt = 25, mb = 55;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
    auto num_label = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
        << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        svg << "<line x1=\"" << sx(fx) << "\" y1=\"" << h - mb << "\" x2=\"" << sx(fx) << "\" y2=\""
            << h - mb + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << sx(fx) << "\" y=\"" << h - mb + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << num_label(fx) << "</text>\n";
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml << "\" y2=\""
            << sy(fy) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << num_label(fy) << "</text>\n";
    }
    svg << "<text x=\"" << (ml + (w - mr)) / 2 << "\" y=\"" << h - 12
        << "\" font-size=\"13\" text-anchor=\"middle\">" << x_col << "</text>\n";
    svg << "<text x=\"18\" y=\"" << (mt + h - mb) / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (mt + h - mb) / 2 << ")\">" << y_col << "</text>\n";

    std::size_t idx = 0;
    for (const auto& name : series_order) {
        const char* color = palette[idx % 8];
        const auto& pts = series[name];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts) svg << sx(x) << "," << sy(y) << " ";
        svg << "\"/>\n";
        for (const auto& [x, y] : pts)
            svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        const double ly = mt + 18 + 18 * static_cast<double>(idx);
        svg << "<line x1=\"" << w - mr + 12 << "\" y1=\"" << ly << "\" x2=\"" << w - mr + 36
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << w - mr + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << name
            << "</text>\n";
        ++idx;
    }
    svg << "</svg>\n";
    write_text_file(out_path, svg.str());
    return exit_ok;
}

// ---------------------------------------------------------------------------
// selfcheck
// ---------------------------------------------------------------------------

int cmd_selfcheck() {
    using namespace postsel;
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
        if (ok) {
            std::cout << "ok - " << name << "\n";
        } else {
            std::cout << "FAIL - " << name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
            ++failures;
        }
    };

    // Region semantics.
    check("regions.covers",
          confidence_region::full_space().covers(3.7) &&
              confidence_region::interval(-1, 1, false, false).covers(1.0) &&
              !confidence_region::interval(-1, 1, false, false).covers(1.0 + 1e-12) &&
              !confidence_region::null_complement(0, 0).covers(0.0) &&
              confidence_region::null_complement(0, 0).covers(0.5));
    check("regions.contains",
          contains_region(confidence_region::interval(0, 1), confidence_region::interval(-1, 2)) &&
              !contains_region(confidence_region::full_space(), confidence_region::interval(0, 1)) &&
              contains_region(confidence_region::empty_set(), confidence_region::empty_set()));

    // Family monotonicity on a grid.
    {
        hoeffding_batch_spec spec{0.2, 400, -1.0, 1.0};
        std::vector<double> grid;
        for (int i = 1; i <= 100; ++i) grid.push_back(i / 101.0);
        const bool mono = is_monotone_on_grid(hoeffding_generalized_eci(spec, 0.05), grid) &&
                          is_monotone_on_grid(hoeffding_plain_ci(spec), grid) &&
                          is_monotone_on_grid(indicator_eci(30.0, -0.5, 0.5), grid) &&
                          is_monotone_on_grid(
                              calibrate_ci(hoeffding_plain_ci(spec), by_calibrator(0.1, 7)), grid);
        check("families.monotone_grid", mono);
    }

    // Generalized e-CI equals the plain interval at its target level.
    {
        rng_stream g(11);
        bool ok = true;
        for (int t = 0; t < 20 && ok; ++t) {
            const double ap = 0.02 + 0.9 * g.uniform01();
            hoeffding_batch_spec spec{g.uniform(-0.5, 0.5), 50 + (g.next() % 5000), -1.0, 1.0};
            const auto a = hoeffding_generalized_eci(spec, ap).evaluate(ap);
            const auto b = hoeffding_plain_ci(spec).evaluate(ap);
            ok = region_equal(a, b, 1e-12 * (std::fabs(a.lo()) + std::fabs(a.hi()) + 1.0));
        }
        check("hoeffding.generalized_matches_plain_at_target", ok);
    }

    // Calibrator integrals.
    {
        auto pw = power_calibrator(0.5);
        double integral = 0.0;
        const int m = 20001;  // Simpson in transformed coordinates p = u^{1/kappa},
                              // skipping the [0, 1e-12] head (at most 1e-12 of mass)
        const double kappa = 0.5;
        const double u0 = 1e-12;
        auto g = [&](double u) {
            const double p = std::pow(u, 1.0 / kappa);
            return pw.f(p) * (1.0 / kappa) * std::pow(u, 1.0 / kappa - 1.0);
        };
        for (int i = 0; i < m - 1; i += 2) {
            const double a = u0 + (1.0 - u0) * i / (m - 1);
            const double b = u0 + (1.0 - u0) * (i + 2) / (m - 1);
            integral += (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
        }
        bool ok = std::fabs(integral - 1.0) < 1e-6;
        auto by = by_calibrator(0.1, 10);
        const double ell = harmonic(10);
        double by_integral = 0.0;
        for (int j = 1; j <= 10; ++j) {
            const double xl = 0.1 * (j - 1) / (10.0 * ell), xr = 0.1 * j / (10.0 * ell);
            by_integral += (xr - xl) * by.f(0.5 * (xl + xr));
        }
        // region beyond the last step contributes zero
        by_integral += 0.0 * by.f(0.5);
        ok = ok && std::fabs(by_integral - 1.0) < 1e-9;
        check("calibrators.integral_one", ok);
    }

    // BY embedded in e-BY via calibration.
    {
        const std::size_t K = 5;
        const double delta = 0.1;
        std::vector<eci_family> cis, cals;
        for (std::size_t i = 0; i < K; ++i) {
            hoeffding_batch_spec spec{0.1 * static_cast<double>(i), 200, -1.0, 1.0};
            cis.push_back(hoeffding_plain_ci(spec));
            cals.push_back(calibrate_ci(cis.back(), by_calibrator(delta, K)));
        }
        bool ok = true;
        for (std::size_t s = 1; s <= K && ok; ++s) {
            selection_outcome sel;
            for (std::size_t i = 1; i <= s; ++i) sel.selected.push_back(i);
            const auto a = by_dependent(cis, sel, delta, K);
            const auto b = e_by(cals, sel, delta, K);
            for (std::size_t e = 0; e < a.entries.size(); ++e)
                ok = ok && region_equal(a.entries[e].region, b.entries[e].region, 1e-9);
        }
        check("procedures.by_equals_calibrated_eby", ok);
    }

    // BH / e-BH against exhaustive oracles.
    {
        rng_stream g(23);
        bool ok = true;
        for (int t = 0; t < 200 && ok; ++t) {
            const std::size_t K = 1 + (g.next() % 10);
            const double delta = 0.05 + 0.4 * g.uniform01();
            std::vector<double> p(K), e(K);
            for (auto& v : p) v = g.uniform01();
            for (auto& v : e) v = std::exp(3.0 * g.normal());
            // oracle: max k such that at least k p-values are <= delta k / K
            std::size_t kbh = 0;
            for (std::size_t k = 1; k <= K; ++k) {
                std::size_t cnt = 0;
                for (double v : p)
                    if (v <= delta * static_cast<double>(k) / static_cast<double>(K)) ++cnt;
                if (cnt >= k) kbh = k;
            }
            std::size_t kebh = 0;
            for (std::size_t k = 1; k <= K; ++k) {
                std::size_t cnt = 0;
                for (double v : e)
                    if (v >= static_cast<double>(K) / (delta * static_cast<double>(k))) ++cnt;
                if (cnt >= k) kebh = k;
            }
            ok = bh_select(p, delta).selected.size() == kbh &&
                 e_bh_select(e, delta).selected.size() == kebh;
        }
        check("selection.matches_bruteforce", ok);
    }

    // Hitting probability limits.
    {
        bool ok = std::fabs(hitting_prob(0.0, 1.0, 1.0) - 0.5) < 1e-15;
        ok = ok && std::fabs(hitting_prob(-1.0, 1.0, 1.0) - 0.11920292202211755) < 1e-12;
        ok = ok && hitting_prob(-1.0, 1.0, 1.0) < hitting_prob(0.0, 1.0, 1.0) &&
             hitting_prob(0.0, 1.0, 1.0) < hitting_prob(1.0, 1.0, 1.0);
        ok = ok && std::fabs(hitting_prob(-1e-10, 2.0, 3.0) - 0.6) < 1e-9;
        check("hitting_prob.limits", ok);
    }

    // Monte-Carlo determinism across thread counts.
    {
        auto metric = [](rng_stream& g, std::size_t) { return g.normal(); };
        const auto a = monte_carlo(metric, 500, 99, 1, "det");
        const auto b = monte_carlo(metric, 500, 99, 2, "det");
        check("monte_carlo.thread_invariant", a.mean == b.mean && a.std_err == b.std_err);
    }

    // Dual p-value identity on an e-CI.
    {
        hoeffding_batch_spec spec{0.25, 300, -1.0, 1.0};
        auto fam = hoeffding_batch_evalue(spec, 0.1);
        auto eci = hoeffding_generalized_eci(spec, 0.1);
        rng_stream g(7);
        bool ok = true;
        for (int t = 0; t < 10 && ok; ++t) {
            const double theta = g.uniform(-0.6, 0.6);
            const double expected = std::min(1.0, 1.0 / fam.evaluate(theta));
            ok = std::fabs(p_dual(eci, theta) - expected) < 1e-6;
        }
        check("calibration.pdual_inverts_evalue", ok);
    }

    std::cout << (failures == 0 ? "selfcheck: all ok\n" : "selfcheck: FAILURES\n");
    return failures == 0 ? exit_ok : exit_internal;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"post-selection confidence intervals via e-values"};
    app.require_subcommand(1);

    auto* report = app.add_subcommand("report", "corrected-level interval report from a JSON spec");
    std::string report_config, report_procedure, report_out = "-";
    std::optional<double> report_delta;
    double report_delta_val = 0.0;
    report->add_option("--config", report_config, "input JSON file")->required();
    report->add_option("--procedure", report_procedure, "eby | weighted-eby | by-ind | by-dep")
        ->required();
    auto* delta_opt = report->add_option("--delta", report_delta_val, "FCR level in (0,1)");
    report->add_option("--out", report_out, "output CSV path (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "run a built-in experiment");
    std::string sim_kind, sim_config, sim_out;
    std::optional<std::uint64_t> sim_seed;
    std::uint64_t sim_seed_val = 0;
    std::optional<std::size_t> sim_reps;
    std::size_t sim_reps_val = 0;
    unsigned sim_threads = 0;
    std::optional<std::string> sim_pmode;
    std::string sim_pmode_val;
    simulate->add_option("--kind", sim_kind, "fig2 | sharpness")->required();
    simulate->add_option("--config", sim_config, "experiment config JSON")->required();
    simulate->add_option("--out", sim_out, "output CSV path")->required();
    auto* seed_opt = simulate->add_option("--seed", sim_seed_val, "override master seed");
    auto* reps_opt = simulate->add_option("--reps", sim_reps_val, "override replication count");
    simulate->add_option("--threads", sim_threads, "worker threads (0 = hardware)");
    auto* pmode_opt =
        simulate->add_option("--pvalue-mode", sim_pmode_val, "consistent | paper (fig2 only)");

    auto* plot = app.add_subcommand("plot", "render an SVG line chart from a simulate CSV");
    std::string plot_csv, plot_out, plot_x = "K", plot_y = "fcr_mean", plot_series = "method";
    plot->add_option("--csv", plot_csv, "input CSV")->required();
    plot->add_option("--out", plot_out, "output SVG path")->required();
    plot->add_option("--x", plot_x, "x-axis column (default K)");
    plot->add_option("--y", plot_y, "y-axis column (default fcr_mean)");
    plot->add_option("--series", plot_series, "series column (default method)");

    app.add_subcommand("selfcheck", "run the built-in invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_bad_input;
    }

    try {
        if (app.got_subcommand("report")) {
            if (delta_opt->count()) report_delta = report_delta_val;
            return cmd_report(report_config, report_procedure, report_delta, report_out);
        }
        if (app.got_subcommand("simulate")) {
            if (seed_opt->count()) sim_seed = sim_seed_val;
            if (reps_opt->count()) sim_reps = sim_reps_val;
            if (pmode_opt->count()) sim_pmode = sim_pmode_val;
            return cmd_simulate(sim_kind, sim_config, sim_out, sim_seed, sim_reps, sim_threads,
                                sim_pmode);
        }
        if (app.got_subcommand("plot"))
            return cmd_plot(plot_csv, plot_out, plot_x, plot_y, plot_series);
        if (app.got_subcommand("selfcheck")) return cmd_selfcheck();
        return exit_bad_input;
    } catch (const postsel::not_an_eci_error& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return exit_contract;
    } catch (const postsel::weight_sum_error& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return exit_contract;
    } catch (const postsel::not_inverse_error& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return exit_contract;
    } catch (const cli_input_error& e) {
        std::cerr << "bad input: " << e.what() << "\n";
        return exit_bad_input;
    } catch (const postsel::invalid_config_error& e) {
        std::cerr << "bad input: " << e.what() << "\n";
        return exit_bad_input;
    } catch (const postsel::invalid_level_error& e) {
        std::cerr << "bad input: " << e.what() << "\n";
        return exit_bad_input;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
}
