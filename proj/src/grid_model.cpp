#include "svsc/grid_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "svsc/errors.hpp"

namespace svsc {

using nlohmann::json;

double StudyCase::total_load_p(int period) const {
    double sum = 0.0;
    for (const auto& l : loads) sum += l.p.at(static_cast<size_t>(period));
    return sum;
}

double StudyCase::total_load_q(int period) const {
    double sum = 0.0;
    for (const auto& l : loads) sum += l.q.at(static_cast<size_t>(period));
    return sum;
}

int StudyCase::fault_index(const std::string& id) const {
    for (size_t i = 0; i < faults.size(); ++i)
        if (faults[i].id == id) return static_cast<int>(i);
    return -1;
}

const FaultScenario& StudyCase::fault_by_id(const std::string& id) const {
    int idx = fault_index(id);
    if (idx < 0) throw SchemaError("CASE_FAULT_UNKNOWN", "no fault scenario with id '" + id + "'");
    return faults[static_cast<size_t>(idx)];
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw SchemaError("CASE_SCHEMA", where + ": unknown key '" + it.key() + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError("CASE_SCHEMA", where + ": missing required field '" + key + "'");
    return *it;
}

template <typename T>
T get_req(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw SchemaError("CASE_SCHEMA", where + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
T get_opt(const json& obj, const char* key, T fallback, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw SchemaError("CASE_SCHEMA", where + ": field '" + key + "': " + e.what());
    }
}

std::string at_index(const char* what, size_t i) {
    std::ostringstream os;
    os << what << "[" << i << "]";
    return os.str();
}

StudyCase parse_case(const json& doc, const std::string& origin) {
    if (!doc.is_object()) throw SchemaError("CASE_SCHEMA", origin + ": top level must be an object");
    reject_unknown_keys(doc,
                        {"buses", "branches", "machines", "windfarms", "loads", "faults", "horizon",
                         "reserves", "options"},
                        origin);

    StudyCase c;
    c.horizon = get_opt<int>(doc, "horizon", 1, origin);

    // --- buses ---
    const json& jbuses = require(doc, "buses", origin);
    if (!jbuses.is_array() || jbuses.empty())
        throw SchemaError("CASE_SCHEMA", origin + ": 'buses' must be a non-empty array");
    std::map<int, int> bus_index;  // original id -> normalized index (sorted by id)
    {
        std::vector<int> ids;
        for (size_t i = 0; i < jbuses.size(); ++i) {
            const std::string where = at_index("buses", i);
            reject_unknown_keys(jbuses[i], {"id", "name", "v_nominal", "v_min", "v_max", "shunt_g", "shunt_b"},
                                where);
            int id = get_req<int>(jbuses[i], "id", where);
            if (bus_index.count(id))
                throw SchemaError("CASE_SCHEMA", where + ": duplicate bus id " + std::to_string(id));
            bus_index[id] = 0;
            ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        for (size_t i = 0; i < ids.size(); ++i) bus_index[ids[i]] = static_cast<int>(i);
    }
    c.buses.resize(jbuses.size());
    for (size_t i = 0; i < jbuses.size(); ++i) {
        const std::string where = at_index("buses", i);
        const json& jb = jbuses[i];
        Bus b;
        int orig = get_req<int>(jb, "id", where);
        b.id = bus_index[orig];
        b.name = get_opt<std::string>(jb, "name", "bus" + std::to_string(orig), where);
        b.v_nominal = get_opt<double>(jb, "v_nominal", 1.0, where);
        b.v_min = get_opt<double>(jb, "v_min", 0.95, where);
        b.v_max = get_opt<double>(jb, "v_max", 1.05, where);
        b.shunt_g = get_opt<double>(jb, "shunt_g", 0.0, where);
        b.shunt_b = get_opt<double>(jb, "shunt_b", 0.0, where);
        c.buses[static_cast<size_t>(b.id)] = b;
    }

    auto map_bus = [&](int id, const std::string& where) {
        auto it = bus_index.find(id);
        if (it == bus_index.end())
            throw SchemaError("CASE_SCHEMA", where + ": references unknown bus id " + std::to_string(id));
        return it->second;
    };

    // --- branches ---
    const json& jbranches = get_opt<json>(doc, "branches", json::array(), origin);
    std::set<int> branch_ids;
    for (size_t i = 0; i < jbranches.size(); ++i) {
        const std::string where = at_index("branches", i);
        const json& jb = jbranches[i];
        reject_unknown_keys(jb, {"id", "from", "to", "r", "x", "b_half", "in_service"}, where);
        Branch br;
        br.id = get_opt<int>(jb, "id", static_cast<int>(i), where);
        if (branch_ids.count(br.id))
            throw SchemaError("CASE_SCHEMA", where + ": duplicate branch id " + std::to_string(br.id));
        branch_ids.insert(br.id);
        br.from_bus = map_bus(get_req<int>(jb, "from", where), where);
        br.to_bus = map_bus(get_req<int>(jb, "to", where), where);
        br.r = get_opt<double>(jb, "r", 0.0, where);
        br.x = get_req<double>(jb, "x", where);
        br.b_half = get_opt<double>(jb, "b_half", 0.0, where);
        br.in_service = get_opt<bool>(jb, "in_service", true, where);
        c.branches.push_back(br);
    }

    // --- machines ---
    const json& jmach = require(doc, "machines", origin);
    for (size_t i = 0; i < jmach.size(); ++i) {
        const std::string where = at_index("machines", i);
        const json& jm = jmach[i];
        reject_unknown_keys(jm,
                            {"bus", "p_min", "p_max", "q_min", "q_max", "x_d_sub", "x_d_tr", "ramp_up",
                             "ramp_down", "t_on_min", "t_off_min", "cost_startup", "cost_shutdown",
                             "cost_fixed", "cost_segments", "init_on", "init_duration", "init_p"},
                            where);
        SyncMachine m;
        m.bus = map_bus(get_req<int>(jm, "bus", where), where);
        m.p_min = get_req<double>(jm, "p_min", where);
        m.p_max = get_req<double>(jm, "p_max", where);
        m.q_min = get_req<double>(jm, "q_min", where);
        m.q_max = get_req<double>(jm, "q_max", where);
        m.x_d_sub = get_req<double>(jm, "x_d_sub", where);
        m.x_d_tr = get_opt<double>(jm, "x_d_tr", m.x_d_sub, where);
        m.ramp_up = get_opt<double>(jm, "ramp_up", m.p_max, where);
        m.ramp_down = get_opt<double>(jm, "ramp_down", m.p_max, where);
        m.t_on_min = get_opt<int>(jm, "t_on_min", 1, where);
        m.t_off_min = get_opt<int>(jm, "t_off_min", 1, where);
        m.cost_startup = get_opt<double>(jm, "cost_startup", 0.0, where);
        m.cost_shutdown = get_opt<double>(jm, "cost_shutdown", 0.0, where);
        m.cost_fixed = get_opt<double>(jm, "cost_fixed", 0.0, where);
        if (jm.contains("cost_segments")) {
            const json& segs = jm["cost_segments"];
            for (size_t s = 0; s < segs.size(); ++s) {
                const std::string swhere = where + ".cost_segments[" + std::to_string(s) + "]";
                reject_unknown_keys(segs[s], {"cap", "slope"}, swhere);
                CostSegment cs;
                cs.cap = get_req<double>(segs[s], "cap", swhere);
                cs.slope = get_req<double>(segs[s], "slope", swhere);
                m.cost_segments.push_back(cs);
            }
        }
        if (m.cost_segments.empty())
            m.cost_segments.push_back({std::max(0.0, m.p_max - m.p_min), 0.0});
        m.init_on = get_opt<bool>(jm, "init_on", true, where);
        m.init_duration = get_opt<int>(jm, "init_duration", std::max(m.t_on_min, m.t_off_min), where);
        m.init_p = get_opt<double>(jm, "init_p", m.init_on ? m.p_min : 0.0, where);
        c.machines.push_back(m);
    }

    // --- wind farms ---
    const json& jwf = get_opt<json>(doc, "windfarms", json::array(), origin);
    for (size_t i = 0; i < jwf.size(); ++i) {
        const std::string where = at_index("windfarms", i);
        const json& jw = jwf[i];
        reject_unknown_keys(jw,
                            {"bus", "s_max", "x_w", "i_rated", "v_trip_low", "v_trip_high", "v_ref_lvrt",
                             "kp_min", "kp_max", "kq_min", "kq_max", "p_forecast"},
                            where);
        WindFarm w;
        w.bus = map_bus(get_req<int>(jw, "bus", where), where);
        w.s_max = get_req<double>(jw, "s_max", where);
        w.x_w = get_opt<double>(jw, "x_w", 0.0, where);
        w.i_rated = get_opt<double>(jw, "i_rated", w.s_max, where);
        w.v_trip_low = get_opt<double>(jw, "v_trip_low", 0.2, where);
        w.v_trip_high = get_opt<double>(jw, "v_trip_high", 1.2, where);
        w.v_ref_lvrt = get_opt<double>(jw, "v_ref_lvrt", 0.9, where);
        w.kp_min = get_opt<double>(jw, "kp_min", 0.0, where);
        w.kp_max = get_opt<double>(jw, "kp_max", 0.5, where);
        w.kq_min = get_opt<double>(jw, "kq_min", 0.0, where);
        w.kq_max = get_opt<double>(jw, "kq_max", 3.0, where);
        w.p_forecast = get_opt<std::vector<double>>(jw, "p_forecast",
                                                    std::vector<double>(static_cast<size_t>(c.horizon), 0.0),
                                                    where);
        if (static_cast<int>(w.p_forecast.size()) != c.horizon)
            throw SchemaError("CASE_SCHEMA", where + ": field 'p_forecast': length " +
                                                 std::to_string(w.p_forecast.size()) + " != horizon " +
                                                 std::to_string(c.horizon));
        c.windfarms.push_back(w);
    }

    // --- loads ---
    const json& jloads = get_opt<json>(doc, "loads", json::array(), origin);
    for (size_t i = 0; i < jloads.size(); ++i) {
        const std::string where = at_index("loads", i);
        const json& jl = jloads[i];
        reject_unknown_keys(jl, {"bus", "p", "q"}, where);
        LoadProfile l;
        l.bus = map_bus(get_req<int>(jl, "bus", where), where);
        l.p = get_req<std::vector<double>>(jl, "p", where);
        l.q = get_opt<std::vector<double>>(jl, "q", std::vector<double>(l.p.size(), 0.0), where);
        if (static_cast<int>(l.p.size()) != c.horizon || static_cast<int>(l.q.size()) != c.horizon)
            throw SchemaError("CASE_SCHEMA", where + ": field 'p'/'q': series length != horizon " +
                                                 std::to_string(c.horizon));
        c.loads.push_back(l);
    }

    // --- faults ---
    const json& jfaults = get_opt<json>(doc, "faults", json::array(), origin);
    std::set<std::string> fault_ids;
    for (size_t i = 0; i < jfaults.size(); ++i) {
        const std::string where = at_index("faults", i);
        const json& jf = jfaults[i];
        reject_unknown_keys(jf, {"id", "bus", "y_f", "post_outages"}, where);
        FaultScenario f;
        f.id = get_opt<std::string>(jf, "id", "fault" + std::to_string(i), where);
        if (fault_ids.count(f.id))
            throw SchemaError("CASE_SCHEMA", where + ": duplicate fault id '" + f.id + "'");
        fault_ids.insert(f.id);
        f.fault_bus = map_bus(get_req<int>(jf, "bus", where), where);
        f.fault_admittance = get_opt<double>(jf, "y_f", 1e4, where);
        f.post_fault_branch_outages =
            get_opt<std::vector<int>>(jf, "post_outages", {}, where);
        for (int bid : f.post_fault_branch_outages)
            if (!branch_ids.count(bid))
                throw SchemaError("CASE_SCHEMA",
                                  where + ": post_outages references unknown branch id " + std::to_string(bid));
        c.faults.push_back(f);
    }

    // --- reserves ---
    if (doc.contains("reserves")) {
        const json& jr = doc["reserves"];
        reject_unknown_keys(jr, {"up", "down"}, origin + ".reserves");
        c.reserve_up = get_opt<std::vector<double>>(jr, "up",
                                                    std::vector<double>(static_cast<size_t>(c.horizon), 0.0),
                                                    origin + ".reserves");
        c.reserve_down = get_opt<std::vector<double>>(
            jr, "down", std::vector<double>(static_cast<size_t>(c.horizon), 0.0), origin + ".reserves");
    } else {
        c.reserve_up.assign(static_cast<size_t>(c.horizon), 0.0);
        c.reserve_down.assign(static_cast<size_t>(c.horizon), 0.0);
    }
    if (static_cast<int>(c.reserve_up.size()) != c.horizon ||
        static_cast<int>(c.reserve_down.size()) != c.horizon)
        throw SchemaError("CASE_SCHEMA", origin + ".reserves: series length != horizon");

    // --- options ---
    if (doc.contains("options")) {
        const json& jo = doc["options"];
        reject_unknown_keys(jo,
                            {"gbd_tolerance", "gbd_max_iter", "big_m_z", "curtail_bits", "ipm_tolerance",
                             "ipm_max_iter", "milp_gap", "fixed_point_tolerance", "parallel_subproblems",
                             "kappa_dq", "wind_freeze_dq", "lvrt_use_trip_threshold", "aggregate_cuts",
                             "per_period_convergence", "mrscr_threshold", "curtail_penalty"},
                            origin + ".options");
        SolveOptions& o = c.options;
        const std::string ow = origin + ".options";
        o.gbd_tolerance = get_opt<double>(jo, "gbd_tolerance", o.gbd_tolerance, ow);
        o.gbd_max_iter = get_opt<int>(jo, "gbd_max_iter", o.gbd_max_iter, ow);
        o.big_m_z = get_opt<double>(jo, "big_m_z", o.big_m_z, ow);
        o.curtail_bits = get_opt<int>(jo, "curtail_bits", o.curtail_bits, ow);
        o.ipm_tolerance = get_opt<double>(jo, "ipm_tolerance", o.ipm_tolerance, ow);
        o.ipm_max_iter = get_opt<int>(jo, "ipm_max_iter", o.ipm_max_iter, ow);
        o.milp_gap = get_opt<double>(jo, "milp_gap", o.milp_gap, ow);
        o.fixed_point_tolerance = get_opt<double>(jo, "fixed_point_tolerance", o.fixed_point_tolerance, ow);
        o.parallel_subproblems = get_opt<bool>(jo, "parallel_subproblems", o.parallel_subproblems, ow);
        o.kappa_dq = get_opt<double>(jo, "kappa_dq", o.kappa_dq, ow);
        o.wind_freeze_dq = get_opt<bool>(jo, "wind_freeze_dq", o.wind_freeze_dq, ow);
        o.lvrt_use_trip_threshold =
            get_opt<bool>(jo, "lvrt_use_trip_threshold", o.lvrt_use_trip_threshold, ow);
        o.aggregate_cuts = get_opt<bool>(jo, "aggregate_cuts", o.aggregate_cuts, ow);
        o.per_period_convergence = get_opt<bool>(jo, "per_period_convergence", o.per_period_convergence, ow);
        c.mrscr_threshold = get_opt<double>(jo, "mrscr_threshold", c.mrscr_threshold, ow);
        c.curtail_penalty = get_opt<double>(jo, "curtail_penalty", c.curtail_penalty, ow);
    }

    return c;
}

}  // namespace

StudyCase load_case_from_string(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError("CASE_PARSE", origin + ": " + e.what());
    }
    return parse_case(doc, origin);
}

StudyCase load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("CASE_PARSE", "cannot open case file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_case_from_string(buf.str(), path);
}

std::string case_to_string(const StudyCase& c) {
    json doc;
    for (const auto& b : c.buses) {
        json jb;
        jb["id"] = b.id;
        jb["name"] = b.name;
        jb["v_nominal"] = b.v_nominal;
        jb["v_min"] = b.v_min;
        jb["v_max"] = b.v_max;
        jb["shunt_g"] = b.shunt_g;
        jb["shunt_b"] = b.shunt_b;
        doc["buses"].push_back(jb);
    }
    for (const auto& br : c.branches) {
        json jb;
        jb["id"] = br.id;
        jb["from"] = br.from_bus;
        jb["to"] = br.to_bus;
        jb["r"] = br.r;
        jb["x"] = br.x;
        jb["b_half"] = br.b_half;
        jb["in_service"] = br.in_service;
        doc["branches"].push_back(jb);
    }
    for (const auto& m : c.machines) {
        json jm;
        jm["bus"] = m.bus;
        jm["p_min"] = m.p_min;
        jm["p_max"] = m.p_max;
        jm["q_min"] = m.q_min;
        jm["q_max"] = m.q_max;
        jm["x_d_sub"] = m.x_d_sub;
        jm["x_d_tr"] = m.x_d_tr;
        jm["ramp_up"] = m.ramp_up;
        jm["ramp_down"] = m.ramp_down;
        jm["t_on_min"] = m.t_on_min;
        jm["t_off_min"] = m.t_off_min;
        jm["cost_startup"] = m.cost_startup;
        jm["cost_shutdown"] = m.cost_shutdown;
        jm["cost_fixed"] = m.cost_fixed;
        for (const auto& s : m.cost_segments) jm["cost_segments"].push_back({{"cap", s.cap}, {"slope", s.slope}});
        jm["init_on"] = m.init_on;
        jm["init_duration"] = m.init_duration;
        jm["init_p"] = m.init_p;
        doc["machines"].push_back(jm);
    }
    for (const auto& w : c.windfarms) {
        json jw;
        jw["bus"] = w.bus;
        jw["s_max"] = w.s_max;
        jw["x_w"] = w.x_w;
        jw["i_rated"] = w.i_rated;
        jw["v_trip_low"] = w.v_trip_low;
        jw["v_trip_high"] = w.v_trip_high;
        jw["v_ref_lvrt"] = w.v_ref_lvrt;
        jw["kp_min"] = w.kp_min;
        jw["kp_max"] = w.kp_max;
        jw["kq_min"] = w.kq_min;
        jw["kq_max"] = w.kq_max;
        jw["p_forecast"] = w.p_forecast;
        doc["windfarms"].push_back(jw);
    }
    for (const auto& l : c.loads) {
        json jl;
        jl["bus"] = l.bus;
        jl["p"] = l.p;
        jl["q"] = l.q;
        doc["loads"].push_back(jl);
    }
    for (const auto& f : c.faults) {
        json jf;
        jf["id"] = f.id;
        jf["bus"] = f.fault_bus;
        jf["y_f"] = f.fault_admittance;
        jf["post_outages"] = f.post_fault_branch_outages;
        doc["faults"].push_back(jf);
    }
    doc["horizon"] = c.horizon;
    doc["reserves"]["up"] = c.reserve_up;
    doc["reserves"]["down"] = c.reserve_down;
    json jo;
    const SolveOptions& o = c.options;
    jo["gbd_tolerance"] = o.gbd_tolerance;
    jo["gbd_max_iter"] = o.gbd_max_iter;
    jo["big_m_z"] = o.big_m_z;
    jo["curtail_bits"] = o.curtail_bits;
    jo["ipm_tolerance"] = o.ipm_tolerance;
    jo["ipm_max_iter"] = o.ipm_max_iter;
    jo["milp_gap"] = o.milp_gap;
    jo["fixed_point_tolerance"] = o.fixed_point_tolerance;
    jo["parallel_subproblems"] = o.parallel_subproblems;
    jo["kappa_dq"] = o.kappa_dq;
    jo["wind_freeze_dq"] = o.wind_freeze_dq;
    jo["lvrt_use_trip_threshold"] = o.lvrt_use_trip_threshold;
    jo["aggregate_cuts"] = o.aggregate_cuts;
    jo["per_period_convergence"] = o.per_period_convergence;
    jo["mrscr_threshold"] = c.mrscr_threshold;
    jo["curtail_penalty"] = c.curtail_penalty;
    doc["options"] = jo;
    return doc.dump(2) + "\n";
}

void save_case(const StudyCase& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("CASE_WRITE", "cannot open '" + path + "' for writing");
    out << case_to_string(c);
}

namespace {

void check(std::vector<Diagnostic>& out, bool ok, const std::string& entity, const std::string& field,
           const std::string& rule) {
    if (!ok) out.push_back({entity, field, rule});
}

}  // namespace

std::vector<Diagnostic> validate_case(const StudyCase& c) {
    std::vector<Diagnostic> d;
    const int n = c.n_buses();

    check(d, !c.machines.empty(), "case", "machines", "at least one synchronous machine is required");
    check(d, c.horizon >= 1, "case", "horizon", "horizon must be >= 1");
    check(d, c.mrscr_threshold > 0, "case", "mrscr_threshold", "threshold must be positive");

    for (const auto& b : c.buses) {
        const std::string e = "bus " + b.name;
        check(d, b.v_min > 0 && b.v_min < b.v_max, e, "v_min/v_max", "0 < v_min < v_max required");
        check(d, b.v_nominal > 0, e, "v_nominal", "rated voltage must be positive");
    }
    for (size_t i = 0; i < c.buses.size(); ++i)
        check(d, c.buses[i].id == static_cast<int>(i), "bus " + c.buses[i].name, "id",
              "bus ids must be contiguous and 0-based after load");

    for (const auto& br : c.branches) {
        const std::string e = "branch " + std::to_string(br.id);
        check(d, br.x != 0.0, e, "x", "series reactance must be nonzero");
        check(d, br.from_bus != br.to_bus, e, "from/to", "self-loop branches are not allowed");
        check(d, br.from_bus >= 0 && br.from_bus < n && br.to_bus >= 0 && br.to_bus < n, e, "from/to",
              "endpoint bus out of range");
    }

    for (size_t g = 0; g < c.machines.size(); ++g) {
        const auto& m = c.machines[g];
        const std::string e = "machine " + std::to_string(g);
        check(d, m.bus >= 0 && m.bus < n, e, "bus", "bus out of range");
        check(d, m.p_min <= m.p_max, e, "p_min/p_max", "p_min must not exceed p_max");
        check(d, m.q_min <= m.q_max, e, "q_min/q_max", "q_min must not exceed q_max");
        check(d, m.x_d_sub > 0, e, "x_d_sub", "subtransient reactance must be positive");
        check(d, m.x_d_tr >= m.x_d_sub, e, "x_d_tr", "transient reactance must be >= subtransient");
        double prev_slope = -1e300;
        double cap_total = 0;
        bool caps_ok = true, slopes_ok = true;
        for (const auto& s : m.cost_segments) {
            if (s.cap <= 0) caps_ok = false;
            if (s.slope < prev_slope) slopes_ok = false;
            prev_slope = s.slope;
            cap_total += s.cap;
        }
        check(d, caps_ok, e, "cost_segments", "segment caps must be positive");
        check(d, slopes_ok, e, "cost_segments", "segment slopes must be non-decreasing (convex cost)");
        check(d, std::abs(cap_total - (m.p_max - m.p_min)) <= 1e-9 + 1e-9 * std::abs(m.p_max), e,
              "cost_segments", "segment caps must sum to p_max - p_min");
        check(d, m.t_on_min >= 1 && m.t_off_min >= 1, e, "t_on_min/t_off_min",
              "minimum up/down times must be >= 1 period");
    }

    for (size_t w = 0; w < c.windfarms.size(); ++w) {
        const auto& wf = c.windfarms[w];
        const std::string e = "windfarm " + std::to_string(w);
        check(d, wf.bus >= 0 && wf.bus < n, e, "bus", "bus out of range");
        check(d, wf.s_max > 0, e, "s_max", "apparatus limit must be positive");
        check(d, wf.i_rated > 0, e, "i_rated", "rated current must be positive");
        check(d, wf.v_trip_low < wf.v_ref_lvrt && wf.v_ref_lvrt < wf.v_trip_high, e, "v_ref_lvrt",
              "require v_trip_low < v_ref_lvrt < v_trip_high");
        check(d, wf.kp_min >= 0.0 && wf.kp_max <= 0.5 && wf.kp_min <= wf.kp_max, e, "kp_min/kp_max",
              "active-current gain bounds must lie within [0, 0.5]");
        check(d, wf.kq_min >= 0.0 && wf.kq_max <= 3.0 && wf.kq_min <= wf.kq_max, e, "kq_min/kq_max",
              "reactive-current gain bounds must lie within [0, 3]");
        check(d, static_cast<int>(wf.p_forecast.size()) == c.horizon, e, "p_forecast",
              "forecast length must equal the horizon");
        for (double p : wf.p_forecast)
            if (p < 0 || p > wf.s_max) {
                check(d, false, e, "p_forecast", "forecast values must lie within [0, s_max]");
                break;
            }
    }

    for (size_t i = 0; i < c.loads.size(); ++i) {
        const auto& l = c.loads[i];
        const std::string e = "load " + std::to_string(i);
        check(d, l.bus >= 0 && l.bus < n, e, "bus", "bus out of range");
        check(d, static_cast<int>(l.p.size()) == c.horizon && static_cast<int>(l.q.size()) == c.horizon, e,
              "p/q", "series lengths must equal the horizon");
    }

    for (const auto& f : c.faults) {
        const std::string e = "fault " + f.id;
        check(d, f.fault_bus >= 0 && f.fault_bus < n, e, "bus", "fault bus out of range");
        check(d, f.fault_admittance > 0, e, "y_f", "fault admittance must be positive");
        for (int bid : f.post_fault_branch_outages) {
            bool found = false;
            for (const auto& br : c.branches)
                if (br.id == bid) found = true;
            check(d, found, e, "post_outages", "outage references unknown branch id " + std::to_string(bid));
        }
    }

    check(d, static_cast<int>(c.reserve_up.size()) == c.horizon &&
                 static_cast<int>(c.reserve_down.size()) == c.horizon,
          "case", "reserves", "reserve series lengths must equal the horizon");

    // Connectivity of the in-service branch graph (single island).
    if (n > 0) {
        std::vector<char> seen(static_cast<size_t>(n), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int reached = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const auto& br : c.branches) {
                if (!br.in_service) continue;
                int v = -1;
                if (br.from_bus == u) v = br.to_bus;
                if (br.to_bus == u) v = br.from_bus;
                if (v >= 0 && !seen[static_cast<size_t>(v)]) {
                    seen[static_cast<size_t>(v)] = 1;
                    ++reached;
                    q.push(v);
                }
            }
        }
        check(d, reached == n, "case", "branches",
              "in-service branch graph is disconnected (" + std::to_string(n - reached) +
                  " bus(es) unreachable from bus 0)");
    }

    return d;
}

std::vector<std::pair<std::string, std::string>> grid_model_symbols() {
    return {
        {"y_g", "Schedule.y / master variable y[t,g]"},
        {"P_g", "Schedule.p_g / master variable P_g[t,g]"},
        {"Q_g", "subproblem variable Q_g[g]"},
        {"P_w", "Schedule.p_w / master variable P_w[t,w]"},
        {"Q_w", "subproblem variable Q_w[w]"},
        {"P_cur", "Schedule.p_cur / master variable P_cur[t,w]"},
        {"k_p", "WindFarm.kp_min..kp_max / subproblem variable k_p[w]"},
        {"k_q", "WindFarm.kq_min..kq_max / subproblem variable k_q[w]"},
        {"Z", "NetworkMatrices inverse rows / master variables Zr,Zi"},
        {"Y", "NetworkMatrices (g_block, b_block)"},
        {"G", "NetworkMatrices.g_block"},
        {"B", "NetworkMatrices.b_block"},
        {"V", "Snapshot.bus voltages / subproblem variables Vx,Vy"},
        {"I", "Snapshot device currents / subproblem variables Ix,Iy"},
        {"xi", "SubproblemResult slack variables xi_scr/xi_flt/xi_fss/xi_clr"},
        {"lambda", "SubproblemResult multipliers lambda_y/lambda_Pg/lambda_Pw"},
    };
}

}  // namespace svsc
