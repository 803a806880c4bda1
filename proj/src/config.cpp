#include "hubsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hubsim/errors.hpp"
#include "hubsim/phi.hpp"

#include "json.hpp"

namespace hubsim {

namespace {

using nlohmann::json;

struct Collector {
    std::vector<std::string> errors;
    void add(const std::string& e) { errors.push_back(e); }
    void throw_if_any() const {
        if (errors.empty()) return;
        std::ostringstream os;
        os << "config invalid (" << errors.size() << " problem" << (errors.size() > 1 ? "s" : "")
           << "):";
        for (const auto& e : errors) os << "\n  - " << e;
        throw ConfigError(os.str());
    }
};

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed, Collector& errs) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) errs.add("unknown key '" + it.key() + "' in " + where);
}

double need_number(const json& obj, const std::string& where, const std::string& key,
                   Collector& errs, double fallback = 0) {
    if (!obj.contains(key)) {
        errs.add("missing key '" + key + "' in " + where);
        return fallback;
    }
    if (!obj.at(key).is_number()) {
        errs.add("expected a number at " + where + "." + key);
        return fallback;
    }
    return obj.at(key).get<double>();
}

std::vector<double> load_table_file(const std::string& path, Collector& errs) {
    std::ifstream in(path);
    std::vector<double> vals;
    if (!in) {
        errs.add("cannot open table_path '" + path + "'");
        return vals;
    }
    double v;
    while (in >> v) vals.push_back(v);
    if (vals.empty()) errs.add("table file '" + path + "' holds no values");
    return vals;
}

AttachmentFunction parse_f(const json& jf, const std::string& where, Collector& errs);

AttachmentFunction parse_f_inner(const json& jf, const std::string& where, Collector& errs) {
    if (!jf.is_object() || !jf.contains("kind") || !jf.at("kind").is_string()) {
        errs.add(where + " must be an object with a string 'kind'");
        return AttachmentFunction::constant(1);
    }
    std::string kind = jf.at("kind").get<std::string>();
    if (kind == "constant") {
        check_keys(jf, where, {"kind", "c", "monotone", "linear_bound_cf"}, errs);
        return AttachmentFunction::constant(need_number(jf, where, "c", errs, 1));
    }
    if (kind == "affine") {
        check_keys(jf, where, {"kind", "alpha", "monotone", "linear_bound_cf"}, errs);
        return AttachmentFunction::affine(need_number(jf, where, "alpha", errs, 1));
    }
    if (kind == "power") {
        check_keys(jf, where, {"kind", "alpha", "monotone", "linear_bound_cf"}, errs);
        return AttachmentFunction::power(need_number(jf, where, "alpha", errs, 0.5));
    }
    if (kind == "table") {
        check_keys(jf, where, {"kind", "table_path", "tail", "monotone", "linear_bound_cf"}, errs);
        if (!jf.contains("table_path") || !jf.at("table_path").is_string()) {
            errs.add("table attachment needs a string 'table_path' in " + where);
            return AttachmentFunction::constant(1);
        }
        auto vals = load_table_file(jf.at("table_path").get<std::string>(), errs);
        if (vals.empty()) return AttachmentFunction::constant(1);
        TableTail tail = TableTail::HoldLast;
        if (jf.contains("tail")) {
            std::string t = jf.at("tail").is_string() ? jf.at("tail").get<std::string>() : "";
            if (t == "hold_last")
                tail = TableTail::HoldLast;
            else if (t == "error")
                tail = TableTail::Error;
            else
                errs.add("tail must be 'hold_last' or 'error' in " + where);
        }
        return AttachmentFunction::table(std::move(vals), tail);
    }
    if (kind == "product" || kind == "sum") {
        check_keys(jf, where, {"kind", "parts", "monotone", "linear_bound_cf"}, errs);
        std::vector<AttachmentFunction> parts;
        if (!jf.contains("parts") || !jf.at("parts").is_array() || jf.at("parts").empty()) {
            errs.add("composite attachment needs a non-empty 'parts' array in " + where);
            return AttachmentFunction::constant(1);
        }
        int i = 0;
        for (const auto& p : jf.at("parts"))
            parts.push_back(parse_f(p, where + ".parts[" + std::to_string(i++) + "]", errs));
        return kind == "product" ? AttachmentFunction::product(std::move(parts))
                                 : AttachmentFunction::sum(std::move(parts));
    }
    errs.add("unknown attachment kind '" + kind + "' in " + where);
    return AttachmentFunction::constant(1);
}

AttachmentFunction parse_f(const json& jf, const std::string& where, Collector& errs) {
    try {
        auto f = parse_f_inner(jf, where, errs);
        if (jf.is_object()) {
            if (jf.contains("monotone") && jf.at("monotone").is_boolean())
                f.declare_monotone(jf.at("monotone").get<bool>());
            if (jf.contains("linear_bound_cf") && jf.at("linear_bound_cf").is_number())
                f.declare_linear_bound(jf.at("linear_bound_cf").get<double>());
        }
        return f;
    } catch (const ConfigError& e) {
        errs.add(where + ": " + e.what());
        return AttachmentFunction::constant(1);
    }
}

AttachmentSequence parse_m(const json& jm, const std::string& where, Collector& errs) {
    try {
        if (!jm.is_object() || !jm.contains("kind") || !jm.at("kind").is_string()) {
            errs.add(where + " must be an object with a string 'kind'");
            return AttachmentSequence::constant(1);
        }
        std::string kind = jm.at("kind").get<std::string>();
        if (kind == "constant") {
            check_keys(jm, where, {"kind", "m"}, errs);
            return AttachmentSequence::constant(
                static_cast<std::int64_t>(need_number(jm, where, "m", errs, 1)));
        }
        if (kind == "point_mass") {
            check_keys(jm, where, {"kind", "m"}, errs);
            return AttachmentSequence::iid_point_mass(
                static_cast<std::int64_t>(need_number(jm, where, "m", errs, 1)));
        }
        if (kind == "geometric") {
            check_keys(jm, where, {"kind", "p"}, errs);
            return AttachmentSequence::iid_geometric(need_number(jm, where, "p", errs, 0.5));
        }
        if (kind == "zipf") {
            check_keys(jm, where, {"kind", "s", "cap"}, errs);
            return AttachmentSequence::iid_zipf(
                need_number(jm, where, "s", errs, 2.0),
                static_cast<std::int64_t>(need_number(jm, where, "cap", errs, 1000)));
        }
        if (kind == "log_power") {
            check_keys(jm, where, {"kind", "nu"}, errs);
            return AttachmentSequence::log_power(need_number(jm, where, "nu", errs, 1));
        }
        errs.add("unknown attachment sequence kind '" + kind + "' in " + where);
        return AttachmentSequence::constant(1);
    } catch (const ConfigError& e) {
        errs.add(where + ": " + e.what());
        return AttachmentSequence::constant(1);
    }
}

const std::set<std::string> kExperiments = {
    "persistence_scan", "race_fclt",  "iid_tails",   "slowvar",
    "tree_maxdeg",      "index_asymptotics", "uniform_tree", "tail_bounds",
    "mdp_rates",        "embedding_equivalence"};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    Collector errs;

    // duplicate-key detection during parse
    std::vector<std::set<std::string>> key_stack;
    auto cb = [&](int /*depth*/, json::parse_event_t event, json& parsed) {
        if (event == json::parse_event_t::object_start) {
            key_stack.emplace_back();
        } else if (event == json::parse_event_t::object_end) {
            key_stack.pop_back();
        } else if (event == json::parse_event_t::key) {
            auto k = parsed.get<std::string>();
            if (!key_stack.empty() && !key_stack.back().insert(k).second)
                errs.add("duplicate key '" + k + "'");
        }
        return true;
    };
    json j;
    try {
        j = json::parse(text, cb);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    RunConfig cfg;
    cfg.source_digest = std::to_string(fnv1a64(text));

    check_keys(j, "config",
               {"experiment", "model", "models", "rng", "output", "resources", "threads",
                "malthusian", "phi", "race", "ctbp", "thresholds"},
               errs);

    if (j.contains("experiment")) {
        const auto& je = j.at("experiment");
        check_keys(je, "experiment", {"name", "n_values", "t_values", "replicates", "nu"}, errs);
        if (je.contains("name") && je.at("name").is_string()) {
            cfg.experiment_name = je.at("name").get<std::string>();
            if (!kExperiments.count(cfg.experiment_name))
                errs.add("unknown experiment name '" + cfg.experiment_name + "'");
        }
        if (je.contains("n_values")) {
            if (!je.at("n_values").is_array())
                errs.add("experiment.n_values must be an array");
            else
                for (const auto& v : je.at("n_values")) {
                    if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
                        errs.add("experiment.n_values entries must be integers >= 1");
                    else
                        cfg.n_values.push_back(v.get<std::int64_t>());
                }
        }
        if (je.contains("t_values")) {
            if (!je.at("t_values").is_array())
                errs.add("experiment.t_values must be an array");
            else
                for (const auto& v : je.at("t_values")) {
                    if (!v.is_number())
                        errs.add("experiment.t_values entries must be numbers");
                    else
                        cfg.t_values.push_back(v.get<double>());
                }
        }
        if (je.contains("replicates")) {
            auto r = static_cast<std::int64_t>(need_number(je, "experiment", "replicates", errs, 1));
            if (r < 1)
                errs.add("experiment.replicates must be >= 1");
            else
                cfg.replicates = r;
        }
        if (je.contains("nu")) cfg.nu = need_number(je, "experiment", "nu", errs, 2.0);
    }

    if (j.contains("model")) {
        const auto& jm = j.at("model");
        check_keys(jm, "model", {"f", "m", "label"}, errs);
        if (jm.contains("f")) cfg.model.f = parse_f(jm.at("f"), "model.f", errs);
        if (jm.contains("m")) cfg.model.m = parse_m(jm.at("m"), "model.m", errs);
        if (jm.contains("label") && jm.at("label").is_string())
            cfg.model.label = jm.at("label").get<std::string>();
        else
            cfg.model.label = cfg.model.f.describe();
    }
    if (j.contains("models")) {
        if (!j.at("models").is_array())
            errs.add("models must be an array");
        else {
            int i = 0;
            for (const auto& jm : j.at("models")) {
                std::string where = "models[" + std::to_string(i++) + "]";
                check_keys(jm, where, {"f", "m", "label"}, errs);
                ModelSpec spec{AttachmentFunction::constant(1), AttachmentSequence::constant(1),
                               where};
                if (jm.contains("f")) spec.f = parse_f(jm.at("f"), where + ".f", errs);
                if (jm.contains("m")) spec.m = parse_m(jm.at("m"), where + ".m", errs);
                if (jm.contains("label") && jm.at("label").is_string())
                    spec.label = jm.at("label").get<std::string>();
                else
                    spec.label = spec.f.describe();
                cfg.models.push_back(std::move(spec));
            }
        }
    }

    if (j.contains("rng")) {
        const auto& jr = j.at("rng");
        check_keys(jr, "rng", {"master_seed"}, errs);
        if (jr.contains("master_seed")) {
            if (!jr.at("master_seed").is_number_unsigned() && !jr.at("master_seed").is_number_integer())
                errs.add("rng.master_seed must be a 64-bit unsigned integer");
            else
                cfg.master_seed = jr.at("master_seed").get<std::uint64_t>();
        }
    }
    if (j.contains("output")) {
        const auto& jo = j.at("output");
        check_keys(jo, "output", {"dir"}, errs);
        if (jo.contains("dir") && jo.at("dir").is_string())
            cfg.out_dir = jo.at("dir").get<std::string>();
    }
    if (j.contains("resources")) {
        const auto& jr = j.at("resources");
        check_keys(jr, "resources", {"max_events", "max_vertices"}, errs);
        if (jr.contains("max_events"))
            cfg.max_events = static_cast<std::int64_t>(need_number(jr, "resources", "max_events", errs));
        if (jr.contains("max_vertices"))
            cfg.max_vertices =
                static_cast<std::int64_t>(need_number(jr, "resources", "max_vertices", errs));
        if (cfg.max_events < 1 || cfg.max_vertices < 1)
            errs.add("resource caps must be positive");
    }
    if (j.contains("threads")) {
        if (!j.at("threads").is_number_integer())
            errs.add("threads must be an integer");
        else
            cfg.threads = j.at("threads").get<int>();
    }
    if (j.contains("malthusian")) {
        const auto& jm = j.at("malthusian");
        check_keys(jm, "malthusian", {"tol"}, errs);
        if (jm.contains("tol")) {
            cfg.malthusian_tol = need_number(jm, "malthusian", "tol", errs, 1e-10);
            if (!(cfg.malthusian_tol > 0)) errs.add("malthusian.tol must be positive");
        }
    }
    if (j.contains("phi")) {
        const auto& jp = j.at("phi");
        check_keys(jp, "phi", {"horizon"}, errs);
        if (jp.contains("horizon")) {
            cfg.phi_horizon = static_cast<std::int64_t>(need_number(jp, "phi", "horizon", errs, 1));
            if (cfg.phi_horizon < 1) errs.add("phi.horizon must be >= 1");
        }
    }
    if (j.contains("race")) {
        const auto& jr = j.at("race");
        check_keys(jr, "race", {"a", "b", "steps"}, errs);
        if (jr.contains("a")) cfg.race_a = static_cast<std::int64_t>(need_number(jr, "race", "a", errs, 1));
        if (jr.contains("b")) cfg.race_b = static_cast<std::int64_t>(need_number(jr, "race", "b", errs, 1));
        if (jr.contains("steps"))
            cfg.race_steps = static_cast<std::int64_t>(need_number(jr, "race", "steps", errs, 10));
    }
    if (j.contains("ctbp")) {
        const auto& jc = j.at("ctbp");
        check_keys(jc, "ctbp", {"t", "n"}, errs);
        if (jc.contains("t")) cfg.ctbp_t = need_number(jc, "ctbp", "t", errs, 0);
        if (jc.contains("n")) cfg.ctbp_n = static_cast<std::int64_t>(need_number(jc, "ctbp", "n", errs, 0));
    }
    if (j.contains("thresholds")) {
        const auto& jt = j.at("thresholds");
        check_keys(jt, "thresholds", {"path"}, errs);
        if (jt.contains("path") && jt.at("path").is_string())
            cfg.thresholds_path = jt.at("path").get<std::string>();
    }

    // cross-field regime rules
    if (cfg.experiment_name == "uniform_tree") {
        if (!cfg.model.f.is_constant_one()) errs.add("f must be constant 1 for uniform_tree");
        if (!(cfg.model.m.kind() == SeqKind::Constant && cfg.model.m.deterministic_value(1) == 1))
            errs.add("m must be constant 1 for uniform_tree");
    }
    if (cfg.experiment_name == "index_asymptotics" && !cfg.model.f.is_constant_one()) {
        try {
            PhiTable probe(cfg.model.f, 4096);
            if (probe.phi2_class() == Phi2Class::Finite)
                errs.add("index_asymptotics requires Phi2(inf) = inf (C1); this f is in the "
                         "persistent regime");
        } catch (const ModelError& e) {
            errs.add(std::string("model.f invalid: ") + e.what());
        }
    }
    if (cfg.experiment_name == "slowvar") {
        if (cfg.model.f.kind() != FunKind::Power || cfg.model.f.param() <= 0.5 ||
            cfg.model.f.param() >= 1.0)
            errs.add("slowvar requires f = power(alpha) with alpha in (1/2, 1)");
    }

    errs.throw_if_any();
    if (cfg.models.empty()) cfg.models.push_back(cfg.model);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file '" + path + "' does not exist or cannot be read");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace hubsim
