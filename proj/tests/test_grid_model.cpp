#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "svsc/errors.hpp"
#include "svsc/grid_model.hpp"
#include "svsc/master.hpp"
#include "svsc/mrscr.hpp"
#include "svsc/subproblem.hpp"

using namespace svsc;

namespace {

const char* kMinimalCase = R"JSON({
  "buses": [{"id": 0}, {"id": 1}],
  "branches": [{"from": 0, "to": 1, "x": 0.1}],
  "machines": [{"bus": 0, "p_min": 0.1, "p_max": 1.0, "q_min": -0.5, "q_max": 0.5, "x_d_sub": 0.2}],
  "windfarms": [{"bus": 1, "s_max": 1.0, "p_forecast": [0.4]}],
  "horizon": 1
})JSON";

}  // namespace

TEST_CASE("minimal two-bus case loads with defaults applied") {
    StudyCase c = load_case_from_string(kMinimalCase);
    CHECK(c.horizon == 1);
    CHECK(c.mrscr_threshold == doctest::Approx(3.0));
    CHECK(c.n_buses() == 2);
    CHECK(c.machines.size() == 1);
    CHECK(c.windfarms.size() == 1);
    // Ride-through thresholds default to the standard envelope.
    CHECK(c.windfarms[0].v_trip_low == doctest::Approx(0.2));
    CHECK(c.windfarms[0].v_trip_high == doctest::Approx(1.2));
    CHECK(c.windfarms[0].v_ref_lvrt == doctest::Approx(0.9));
    // Missing transient reactance falls back to the subtransient value.
    CHECK(c.machines[0].x_d_tr == doctest::Approx(0.2));
    CHECK(c.options.gbd_tolerance == doctest::Approx(1e-4));
}

TEST_CASE("schema violations are named per field") {
    CHECK_THROWS_AS(load_case_from_string("{"), ParseError);
    CHECK_THROWS_AS(load_case_from_string(R"({"buses": [{"id": 0}]})"), SchemaError);

    // Unknown keys are rejected.
    CHECK_THROWS_WITH_AS(
        load_case_from_string(
            R"({"buses": [{"id": 0, "voltage": 1.0}], "machines": [], "horizon": 1})"),
        doctest::Contains("unknown key 'voltage'"), SchemaError);

    // Missing required field names the field.
    CHECK_THROWS_WITH_AS(load_case_from_string(R"({"buses": [{"id": 0}], "machines": [{"bus": 0}]})"),
                         doctest::Contains("p_min"), SchemaError);

    // Forecast length must match the horizon.
    CHECK_THROWS_AS(load_case_from_string(R"JSON({
        "buses": [{"id": 0}],
        "machines": [{"bus": 0, "p_min": 0, "p_max": 1, "q_min": 0, "q_max": 0, "x_d_sub": 0.1}],
        "windfarms": [{"bus": 0, "s_max": 1, "p_forecast": [0.1, 0.2]}],
        "horizon": 1})JSON"),
                    SchemaError);
}

TEST_CASE("bus ids are normalized to contiguous indices") {
    StudyCase c = load_case_from_string(R"JSON({
        "buses": [{"id": 7}, {"id": 3}],
        "branches": [{"from": 7, "to": 3, "x": 0.2}],
        "machines": [{"bus": 3, "p_min": 0, "p_max": 1, "q_min": -1, "q_max": 1, "x_d_sub": 0.2}],
        "horizon": 1})JSON");
    CHECK(c.buses[0].id == 0);
    CHECK(c.buses[1].id == 1);
    CHECK(c.buses[0].name == "bus3");
    CHECK(c.machines[0].bus == 0);   // original id 3 sorts first
    CHECK(c.branches[0].from_bus == 1);
}

TEST_CASE("save and reload is the identity on loaded cases") {
    StudyCase c = fixtures::five_bus();
    const std::string text = case_to_string(c);
    StudyCase r = load_case_from_string(text);
    const std::string text2 = case_to_string(r);
    CHECK(text == text2);
    CHECK(r.n_buses() == c.n_buses());
    CHECK(r.machines.size() == c.machines.size());
    CHECK(r.windfarms[0].p_forecast == c.windfarms[0].p_forecast);
    CHECK(r.options.curtail_bits == c.options.curtail_bits);
    CHECK(r.mrscr_threshold == doctest::Approx(c.mrscr_threshold));
}

TEST_CASE("validator flags gain bounds outside the control box") {
    StudyCase c = fixtures::five_bus();
    c.windfarms[0].kq_max = 5.0;
    const auto diags = validate_case(c);
    REQUIRE(!diags.empty());
    bool found = false;
    for (const auto& d : diags)
        if (d.field == "kq_min/kq_max" && d.rule.find("[0, 3]") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validator flags a disconnected island") {
    StudyCase c = fixtures::five_bus();
    c.branches[2].in_service = false;  // severs buses 3,4 except via 2-4
    c.branches[3].in_service = false;
    c.branches[4].in_service = false;
    const auto diags = validate_case(c);
    bool found = false;
    for (const auto& d : diags)
        if (d.rule.find("disconnected") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validator is pure and passes well-formed cases") {
    StudyCase c = fixtures::tdsim_fixture();
    const auto d1 = validate_case(c);
    const auto d2 = validate_case(c);
    CHECK(d1.empty());
    CHECK(d1.size() == d2.size());
}

TEST_CASE("39-bus style case file loads with stations at the documented buses") {
    StudyCase c = load_case(std::string(SVSC_CASE_DIR) + "/wind39.json");
    CHECK(c.n_buses() == 41);
    REQUIRE(c.windfarms.size() == 4);
    std::set<int> got;
    for (const auto& w : c.windfarms) got.insert(w.bus);
    CHECK(got == std::set<int>{11, 14, 19, 40});
    CHECK(validate_case(c).empty());
}

TEST_CASE("model symbols resolve to declared fields or variables") {
    std::map<std::string, std::string> table;
    for (const auto& [sym, binding] : grid_model_symbols()) table[sym] = binding;
    for (const auto& [sym, binding] : master_symbols()) table["master:" + sym] = binding;
    for (const auto& [sym, binding] : subproblem_symbols()) table["sub:" + sym] = binding;

    for (const char* sym : {"y_g", "P_g", "Q_g", "P_w", "Q_w", "k_p", "k_q", "Z", "Y", "G", "B", "V",
                            "I", "xi", "lambda"})
        CHECK_MESSAGE(table.count(sym) == 1, "missing symbol ", sym);

    // The bindings that claim to be builder variables must exist in a built
    // problem.
    StudyCase c = fixtures::toy_uc(2, {0.5, 0.9});
    MasterModel mm = build_master(c, {}, false);
    CHECK(mm.problem.var_index(master_var_y(0, 0)) >= 0);
    CHECK(mm.problem.var_index(master_var_pg(1, 1)) >= 0);

    Schedule s = Schedule{};
    s.horizon = 2;
    s.y = {{1, 0}, {1, 0}};
    s.p_g = {{0.5, 0.0}, {0.9, 0.0}};
    s.p_w = {{}, {}};
    s.p_cur = {{}, {}};
    SubproblemModel sm = build_subproblem(c, 0, s);
    CHECK(sm.problem.var_index(sub_var_qg(0)) >= 0);
    CHECK(sm.problem.var_index(sub_var_y(1)) >= 0);
}
