#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "dynmod/experiments.hpp"

using namespace dynmod;
namespace ex = dynmod::experiments;

namespace {

const ex::Experiment& get(const std::string& id) {
    const ex::Experiment* e = ex::find_experiment(id);
    if (!e) throw std::logic_error("missing experiment " + id);
    return *e;
}

std::filesystem::path scratch_file(const std::string& name, const std::string& content) {
    const auto dir = std::filesystem::path(DYNMOD_TEST_SCRATCH) / "experiments";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

} // namespace

TEST(Formatting, TwelveSignificantDigits) {
    EXPECT_EQ(ex::format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(ex::format_number(2.404), "2.404");
    EXPECT_EQ(ex::format_number(-0.0), "0");
    EXPECT_EQ(ex::format_number(1e-300), "1e-300");
    EXPECT_EQ(ex::format_number(123456789012345.0), "1.23456789012e+14");
}

TEST(Formatting, ColumnTokens) {
    EXPECT_EQ(ex::column_token(2.404), "2404");
    EXPECT_EQ(ex::column_token(0.2), "02");
    EXPECT_EQ(ex::column_token(5.0), "5");
    EXPECT_EQ(ex::column_token(0.0), "0");
    EXPECT_EQ(ex::column_token(-1.5), "m15");
}

TEST(Formatting, TableLayout) {
    ex::Table t{{"a", "b"}, {{1.0, 0.5}, {2.0, -0.0}}};
    EXPECT_EQ(t.render(), std::string(ex::kUnitsLine) + "\na,b\n1,0.5\n2,0\n");
}

TEST(Formatting, SummaryLines) {
    ex::Output o;
    o.metric("x", 0.25);
    o.flag("ok", true);
    EXPECT_EQ(o.render_summary(), "x = 0.25\nok = true\n");
}

TEST(Params, ParsesListsAndScalars) {
    const ex::Params p(ex::ParamMap{{"xi", "0, 2,2.404"}, {"nu", "100"}, {"h", "auto"}, {"stats", "bosonic"}, {"n", "40"}});
    EXPECT_EQ(p.list("xi"), (std::vector<double>{0.0, 2.0, 2.404}));
    EXPECT_DOUBLE_EQ(p.num("nu"), 100.0);
    EXPECT_EQ(p.count("n"), 40u);
    EXPECT_FALSE(p.step().has_value());
    EXPECT_EQ(p.statistics(), Statistics::bosonic);
    EXPECT_DOUBLE_EQ(ex::Params(ex::ParamMap{{"h", "0.002"}}).step().value(), 0.002);
}

TEST(Params, RejectsMalformedValues) {
    const ex::Params p(ex::ParamMap{{"xi", "1,,2"}, {"nu", "abc"}, {"n", "2.5"}, {"m", "1,2"}, {"stats", "classical"}});
    EXPECT_THROW(p.list("xi"), InvalidInput);
    EXPECT_THROW(p.num("nu"), InvalidInput);
    EXPECT_THROW(p.count("n"), InvalidInput);
    EXPECT_THROW(p.num("m"), InvalidInput);
    EXPECT_THROW(p.statistics(), InvalidInput);
    EXPECT_THROW(p.text("absent"), InvalidInput);
    EXPECT_THROW(ex::Params(ex::ParamMap{{"x", "nan"}}).num("x"), InvalidInput);
}

TEST(ConfigFile, ReadsPairsAndComments) {
    const auto path = scratch_file("ok.cfg", "# header\nxi = 1.5   # inline\n\n  nu=40\n");
    const ex::ParamMap m = ex::read_config_file(path.string());
    EXPECT_EQ(m.size(), 2u);
    EXPECT_EQ(m.at("xi"), "1.5");
    EXPECT_EQ(m.at("nu"), "40");
}

TEST(ConfigFile, ReportsLineOfSyntaxError) {
    const auto path = scratch_file("bad.cfg", "xi = 1\nthis line has no separator\n");
    try {
        ex::read_config_file(path.string());
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(ex::read_config_file("/nonexistent/dynmod.cfg"), InvalidInput);
}

TEST(Registry, ProvidesEveryFigure) {
    std::vector<std::string> ids;
    for (const auto& e : ex::registry()) ids.push_back(e.id);
    EXPECT_EQ(ids, (std::vector<std::string>{"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "figB1",
                                             "figB2", "figD1", "custom"}));
    EXPECT_EQ(ex::find_experiment("fig99"), nullptr);
}

TEST(Registry, CaptionDefaults) {
    const ex::Params f1 = ex::resolve(get("fig1"), {}, {});
    EXPECT_DOUBLE_EQ(f1.num("delta_c"), 0.0);
    EXPECT_DOUBLE_EQ(f1.num("nu"), 100.0);
    EXPECT_EQ(f1.list("xi"), (std::vector<double>{0.0, 2.0, 2.404}));
    EXPECT_EQ(f1.list("lambda"), (std::vector<double>{5.0, 0.2}));

    const ex::Params f2 = ex::resolve(get("fig2"), {}, {});
    EXPECT_DOUBLE_EQ(f2.num("delta_c"), 0.0);
    EXPECT_DOUBLE_EQ(f2.num("t_max"), 100.0);
    EXPECT_DOUBLE_EQ(f2.num("nu"), 100.0);

    const ex::Params f7 = ex::resolve(get("fig7"), {}, {});
    EXPECT_DOUBLE_EQ(f7.num("omega0"), 31.0);
    EXPECT_DOUBLE_EQ(f7.num("nu"), 30.0);
    EXPECT_DOUBLE_EQ(f7.num("xi"), 1.0);
    EXPECT_EQ(f7.count("T_points"), 400u);
    EXPECT_DOUBLE_EQ(f7.num("T_min"), 0.05);
    EXPECT_DOUBLE_EQ(f7.num("T_max"), 50.0);

    // the bosonic figure fixes its statistics
    const ex::Params d1 = ex::resolve(get("figD1"), {}, {});
    EXPECT_FALSE(d1.has("stats"));
    EXPECT_DOUBLE_EQ(d1.num("temp"), 2.0);
}

TEST(Resolve, CommandLineOverridesFileOverridesDefaults) {
    const ex::Params p = ex::resolve(get("custom"), {{"xi", "1"}, {"t_max", "4"}}, {{"t_max", "2"}});
    EXPECT_DOUBLE_EQ(p.num("xi"), 1.0);
    EXPECT_DOUBLE_EQ(p.num("t_max"), 2.0);
}

TEST(Resolve, RejectsUnknownAndInapplicableKeys) {
    EXPECT_THROW(ex::resolve(get("fig1"), {}, {{"bogus", "1"}}), InvalidInput);
    EXPECT_THROW(ex::resolve(get("fig1"), {}, {{"temp", "1"}}), InvalidInput);
    EXPECT_THROW(ex::resolve(get("fig7"), {}, {{"t_max", "1"}}), InvalidInput);
}

TEST(Resolve, InvariantViolationsNameTheKey) {
    auto message = [](const std::string& id, const ex::ParamMap& cli) {
        try {
            ex::resolve(get(id), {}, cli);
        } catch (const InvalidInput& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("fig1", {{"lambda", "5,-1"}}).find("lambda must be > 0"), std::string::npos);
    EXPECT_NE(message("fig1", {{"delta_c", "100"}}).find("omega_c"), std::string::npos);
    EXPECT_NE(message("fig7", {{"T_min", "10"}, {"T_max", "1"}}).find("T_min"), std::string::npos);
    EXPECT_NE(message("fig1", {{"initial_pe", "1.5"}}).find("initial_pe"), std::string::npos);
    EXPECT_NE(message("fig6", {{"stats", "classical"}}).find("stats"), std::string::npos);
}

TEST(Resolve, SpectrumCenterFoldsIntoDetuning) {
    EXPECT_DOUBLE_EQ(ex::resolve(get("fig3"), {}, {{"omega_c", "70"}}).num("delta_c"), 30.0);
    EXPECT_NO_THROW(ex::resolve(get("fig3"), {}, {{"omega_c", "70"}, {"delta_c", "30"}}));
    EXPECT_THROW(ex::resolve(get("fig3"), {}, {{"omega_c", "70"}, {"delta_c", "20"}}), InvalidInput);
}

TEST(Resolve, DescribeEchoesDerivedCenter) {
    const std::string d = ex::describe(get("fig3"), ex::resolve(get("fig3"), {}, {{"nu", "40"}}));
    EXPECT_NE(d.find("experiment = fig3\n"), std::string::npos);
    EXPECT_NE(d.find("nu = 40\n"), std::string::npos);
    EXPECT_NE(d.find("omega_c = 60\n"), std::string::npos);
}

TEST(Sampling, OutputGridRules) {
    const ex::Params ok(ex::ParamMap{{"t_max", "1"}, {"dt_out", "0.1"}, {"h", "auto"}});
    const auto s = ex::detail::sampling(ok, 0.004);
    EXPECT_EQ(s.rows, 11u);
    EXPECT_EQ(s.stride, 25u);
    EXPECT_NEAR(s.h, 0.004, 1e-15);
    EXPECT_THROW(ex::detail::sampling(ex::Params(ex::ParamMap{{"t_max", "1.05"}, {"dt_out", "0.1"}, {"h", "auto"}}), 0.004),
                 InvalidInput);
    EXPECT_THROW(ex::detail::sampling(ex::Params(ex::ParamMap{{"t_max", "1"}, {"dt_out", "0.1"}, {"h", "0.03"}}), 0.1),
                 InvalidInput);
    EXPECT_EQ(ex::detail::sampling(ex::Params(ex::ParamMap{{"t_max", "1"}, {"dt_out", "0.1"}, {"h", "0.02"}}), 0.1).stride, 5u);
}

TEST(Experiments, CustomRunMatchesLibrary) {
    const ex::Params p = ex::resolve(get("custom"), {}, {{"t_max", "2"}, {"xi", "2.404"}});
    const ex::Output out = get("custom").run(p);
    ASSERT_EQ(out.files.size(), 1u);
    const ex::Table& t = out.files[0].second;
    EXPECT_EQ(t.header, (std::vector<std::string>{"omega_t", "pe_numeric", "pe_analytic"}));
    ASSERT_EQ(t.rows.size(), 21u);
    const LorentzianSpectrum bath{1.0, 5.0, 100.0};
    const ModulationConfig mod{2.404, 100.0};
    const double h = ex::detail::sampling(p, default_step(bath, mod)).h;
    const auto traj = solve_amplitude_exact({100.0}, bath, mod, std::sqrt(0.5), 2.0, h);
    EXPECT_NEAR(t.rows.back()[1], std::norm(traj.excited.back()), 1e-12);
}
