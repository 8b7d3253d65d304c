#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <schrodbox/schrodbox.hpp>

using namespace schrodbox;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string config_dir() { return SCHRODBOX_CONFIG_DIR; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_message(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

SimulationConfig base_config() {
    SimulationConfig c;
    c.a = 0.0;
    c.b = 50.0;
    c.dx = 0.2;
    c.dt = 0.01;
    c.model.kind = ModelKind::tight_binding;
    c.model.m_star = 0.2 * kElectronMass;
    c.packet.x0 = -70.0;
    c.packet.sigma0 = 25.0 / std::sqrt(2.0);
    c.energy_ev = 0.1;
    return c;
}

}  // namespace

TEST_CASE("physical constants", "[core]") {
    REQUIRE(kHbar == 0.6582119569);
    REQUIRE(kElectronMass == 5.68563);
    REQUIRE(kLeapfrogSafetyFactor == 0.5);
}

TEST_CASE("hopping and mass are inverses", "[core]") {
    const double dx = 0.2;
    const double m_star = 0.2 * kElectronMass;
    const double u = hopping_for_mass(m_star, dx);
    REQUIRE_THAT(u, WithinRel(-4.7624777312, 1e-9));
    REQUIRE_THAT(mass_for_hopping(u, dx), WithinRel(m_star, 1e-14));

    SimulationConfig c = resolve_config(base_config());
    REQUIRE_THAT(c.model.u, WithinRel(-4.7624777312, 1e-9));
    REQUIRE_THAT(c.model.rho, WithinRel(9.5249554624, 1e-9));
}

TEST_CASE("explicit stability limit", "[core]") {
    SimulationConfig c = resolve_config(base_config());
    REQUIRE_THAT(stability_limit(c), WithinRel(0.0345519703, 1e-8));

    SECTION("a barrier raises H_max and lowers the limit") {
        SimulationConfig b = base_config();
        b.potential.kind = PotentialKind::rectangular_barrier;
        b.potential.barrier_center = 25.0;
        b.potential.barrier_width = 5.0;
        b.potential.barrier_height = 1.0;
        REQUIRE(stability_limit(resolve_config(b)) < stability_limit(c));
    }

    SECTION("validate flags a dt above the limit") {
        SimulationConfig b = base_config();
        b.dt = 0.05;
        REQUIRE(has_message(validate_config(b), "exceeds the explicit stability limit"));
    }
}

TEST_CASE("grid construction snaps edges to nodes", "[core]") {
    const Grid g = build_grid(-800.0, 800.0, 0.2, 0.0, 50.0);
    REQUIRE(g.n_points == 8001);
    REQUIRE(g.ia == 4000);
    REQUIRE(g.ib == 4250);
    REQUIRE_THAT(g.x(g.ia), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(g.x(g.ib), WithinAbs(50.0, 1e-12));
    REQUIRE_THAT(g.x(0), WithinAbs(-800.0, 1e-12));

    SECTION("non-commensurate spans are rejected") {
        REQUIRE_THROWS_AS(build_grid(-800.0, 800.0, 0.2, 0.0, 50.1),
                          NonCommensurateGrid);
        REQUIRE_THROWS_AS(build_grid(-800.3, 800.0, 0.2, 0.0, 50.0),
                          NonCommensurateGrid);
    }
}

TEST_CASE("resolve derives the carrier and absorber lengths", "[core]") {
    struct Pin {
        double energy, kx, length;
    };
    // parabolic carrier sqrt(2 m* E)/hbar; layer length is ten de Broglie
    // wavelengths, 20 pi / kx
    const Pin pins[] = {
        {0.01, 0.2291150012, 274.2371854465},
        {0.1, 0.7245252499, 86.7214125125},
        {1.0, 2.2911500120, 27.4237185447},
    };
    for (const Pin& p : pins) {
        SimulationConfig c = base_config();
        c.energy_ev = p.energy;
        c.left.absorber = AbsorberSpec{};
        c.right.absorber = AbsorberSpec{};
        c = resolve_config(c);
        CAPTURE(p.energy);
        REQUIRE_THAT(c.packet.kx, WithinRel(p.kx, 1e-9));
        REQUIRE_THAT(c.left.absorber->length, WithinRel(p.length, 1e-9));
        REQUIRE_THAT(c.right.absorber->length, WithinRel(p.length, 1e-9));
    }

    SECTION("explicit lengths are left alone") {
        SimulationConfig c = base_config();
        c.left.absorber = AbsorberSpec{5, 100.0, false};
        c = resolve_config(c);
        REQUIRE(c.left.absorber->length == 100.0);
    }

    SECTION("right-side packets get a negative carrier") {
        SimulationConfig c = base_config();
        c.packet.injection_side = Side::right;
        c = resolve_config(c);
        REQUIRE_THAT(c.packet.kx, WithinRel(-0.7245252499, 1e-9));
    }
}

TEST_CASE("config file round trip", "[core]") {
    SimulationConfig c = load_config(config_dir() + "/barrier_scatter.ini");
    REQUIRE(c.a == 0.0);
    REQUIRE(c.b == 50.0);
    REQUIRE(c.dx == 0.2);
    REQUIRE(c.dt == 0.01);
    REQUIRE(c.model.kind == ModelKind::tight_binding);
    REQUIRE_THAT(c.model.m_star, WithinRel(0.2 * kElectronMass, 1e-12));
    REQUIRE(c.packet.x0 == -90.0);
    REQUIRE_THAT(c.packet.sigma0, WithinRel(25.0 / std::sqrt(2.0), 1e-12));
    REQUIRE(c.energy_ev == 0.1);
    REQUIRE(c.potential.kind == PotentialKind::rectangular_barrier);
    REQUIRE(c.potential.barrier_height == 0.0825);
    REQUIRE(c.left.analytic_injection);
    REQUIRE(c.left.absorber.has_value());
    REQUIRE(c.left.absorber->m_exp == 5);
    REQUIRE(c.left.absorber->auto_length);
    REQUIRE(c.left.remap.has_value());
    REQUIRE(c.left.remap->La == 20.0);
    REQUIRE(c.right.absorber.has_value());
    REQUIRE_FALSE(c.right.analytic_injection);
    REQUIRE(c.stop.kind == StopKind::window_norm_below);
    REQUIRE(c.stop.threshold == 1e-3);
    REQUIRE(c.output.cadence == 100);
    REQUIRE(c.output.csv);
    REQUIRE_FALSE(c.output.ndjson);

    SECTION("serialize then parse reproduces the fields") {
        const std::string text = serialize_config(c);
        SimulationConfig d = parse_config(text, config_dir());
        REQUIRE(d.a == c.a);
        REQUIRE(d.b == c.b);
        REQUIRE(d.dx == c.dx);
        REQUIRE(d.dt == c.dt);
        REQUIRE(d.max_steps == c.max_steps);
        REQUIRE(d.packet.x0 == c.packet.x0);
        REQUIRE(d.packet.sigma0 == c.packet.sigma0);
        REQUIRE(d.energy_ev == c.energy_ev);
        REQUIRE(d.potential.kind == c.potential.kind);
        REQUIRE(d.potential.barrier_height == c.potential.barrier_height);
        REQUIRE(d.left.analytic_injection == c.left.analytic_injection);
        REQUIRE(d.left.absorber->m_exp == c.left.absorber->m_exp);
        REQUIRE(d.left.remap->La == c.left.remap->La);
        REQUIRE(d.stop.kind == c.stop.kind);
        REQUIRE(d.stop.threshold == c.stop.threshold);
        REQUIRE(d.output.cadence == c.output.cadence);
        REQUIRE(serialize_config(d) == text);
    }
}

TEST_CASE("unit-suffixed keys parse with signs and exponents", "[core]") {
    const std::string text =
        "[domain]\n"
        "a_nm = -12.5\n"
        "b_nm = 37.5\n"
        "dx_nm = 0.25\n"
        "[time]\n"
        "dt_fs = 5e-3\n"
        "max_steps = 1234\n"
        "[model]\n"
        "kind = effective_mass\n"
        "m_star_rel = 0.5\n"
        "[packet]\n"
        "x0_nm = -100\n"
        "sigma0_nm = 10\n"
        "energy_ev = 0.25\n"
        "side = left\n"
        "[stop]\n"
        "kind = none\n";
    SimulationConfig c = parse_config(text, ".");
    REQUIRE(c.a == -12.5);
    REQUIRE(c.b == 37.5);
    REQUIRE(c.dx == 0.25);
    REQUIRE(c.dt == 5e-3);
    REQUIRE(c.max_steps == 1234);
    REQUIRE(c.model.kind == ModelKind::effective_mass);
    REQUIRE(c.packet.x0 == -100.0);
    REQUIRE(c.energy_ev == 0.25);
    REQUIRE(c.stop.kind == StopKind::none);
}

TEST_CASE("sweep section parses variable and values", "[core]") {
    const SweepSpec s =
        parse_sweep(slurp(config_dir() + "/absorber_exponent_sweep.ini"));
    REQUIRE(s.variable == "m_exp");
    REQUIRE(s.values == std::vector<double>{3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("validation messages name the violated rule", "[core]") {
    SECTION("a clean config validates") {
        REQUIRE(validate_config(base_config()).empty());
        REQUIRE(
            validate_config(load_config(config_dir() + "/barrier_scatter.ini")).empty());
    }
    SECTION("inverted window") {
        SimulationConfig c = base_config();
        c.b = c.a - 1.0;
        REQUIRE(has_message(validate_config(c), "window needs a < b"));
    }
    SECTION("window not commensurate with dx") {
        SimulationConfig c = base_config();
        c.b = 50.1;
        REQUIRE(has_message(validate_config(c), "not a multiple of dx"));
    }
    SECTION("missing carrier") {
        SimulationConfig c = base_config();
        c.energy_ev = 0.0;
        c.packet.kx = 0.0;
        REQUIRE(has_message(validate_config(c), "packet needs kx or a positive energy"));
    }
    SECTION("injection on both sides") {
        SimulationConfig c = base_config();
        c.left.analytic_injection = true;
        c.right.analytic_injection = true;
        REQUIRE(has_message(validate_config(c), "injection configured on both sides"));
    }
    SECTION("packet too close to the window") {
        SimulationConfig c = base_config();
        c.left.analytic_injection = true;
        c.packet.x0 = -50.0;
        REQUIRE(has_message(validate_config(c),
                            "packet must start at least 5 sigma0 left of a"));
    }
    SECTION("absorber exponent below three") {
        SimulationConfig c = base_config();
        c.right.absorber = AbsorberSpec{2, 0.0, true};
        REQUIRE(has_message(validate_config(c), "absorber exponent must be >= 3"));
    }
    SECTION("unresolvable configs collapse to one message") {
        SimulationConfig c = base_config();
        c.energy_ev = 0.0;
        c.packet.kx = 0.0;
        c.right.absorber = AbsorberSpec{};  // auto length needs a carrier
        const auto v = validate_config(c);
        REQUIRE(v.size() == 1);
        REQUIRE_THAT(v[0], ContainsSubstring("config does not resolve"));
    }
}

TEST_CASE("error types share the common base", "[core]") {
    REQUIRE_THROWS_AS(throw NumericalBlowup("x"), Error);
    REQUIRE_THROWS_AS(throw TruncatedSupport("x"), Error);
    REQUIRE_THROWS_AS(throw MisalignedTrajectories("x"), Error);
    REQUIRE_THROWS_AS(throw OutOfBand("x"), std::runtime_error);
}
