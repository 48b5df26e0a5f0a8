// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <gwg/gwg.hpp>

#include "properties.hpp"

namespace {

struct Outcome
{
    bool        pass;
    std::string detail;
};

std::string
fmt(const char* f, double a, double b, double c)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

bool
near(double v, double target, double tol)
{
    return std::isfinite(v) && std::abs(v - target) <= tol;
}

gwg::Rates
final_rates(const gwg::ErrorReport& r)
{
    return r.rates().back();
}

gwg::ErrorReport
study(const std::string& name, gwg::MeshFamily family, std::vector<std::size_t> labels, gwg::Signature sig,
      double rho, double gamma, double alpha = 0.5)
{
    gwg::SchemeParameters params;
    params.rho = rho;
    params.gamma = gamma;
    return gwg::run_convergence_study(gwg::cases::by_name(name, alpha), family, labels, sig, params);
}

Outcome
rates_within(const gwg::ErrorReport& r, std::array<double, 3> target, double tol)
{
    auto k = final_rates(r);
    bool ok = near(k.energy, target[0], tol) && near(k.l2, target[1], tol) && near(k.edge, target[2], tol);
    return {ok, fmt("final rates %.3f / %.3f / %.3f", k.energy, k.l2, k.edge)};
}

Outcome
criterion_1()
{
    auto r = study("cospi_cospi", gwg::MeshFamily::triangular, {8, 16, 32, 64}, {3, 4, 4}, 1.0, -1.0);
    auto out = rates_within(r, {3.00, 4.01, 4.00}, 0.1);
    // Published errors per level (energy, L2, edge).
    const double ref[4][3] = {{1.56e-4, 1.33e-6, 4.13e-6},
                              {1.95e-5, 8.03e-8, 2.60e-7},
                              {2.45e-6, 4.96e-9, 1.63e-8},
                              {3.06e-7, 3.08e-10, 1.02e-9}};
    double worst = 1.0;
    for (std::size_t i = 0; i < 4; i++)
    {
        const auto& lv = r.levels[i];
        for (auto [got, want] : {std::pair{lv.energy, ref[i][0]}, {lv.l2, ref[i][1]}, {lv.edge, ref[i][2]}})
            worst = std::max({worst, got / want, want / got});
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "; worst error ratio to reference %.2f", worst);
    out.detail += buf;
    out.pass = out.pass && worst <= 2.0;
    return out;
}

Outcome
criterion_2()
{
    auto r = study("cospi_cospi", gwg::MeshFamily::triangular, {8, 16, 32, 64}, {0, 1, 1}, 1.0, 1.0);
    return rates_within(r, {2.0, 2.0, 2.0}, 0.1);
}

Outcome
criterion_3()
{
    auto r = study("cospi_cospi", gwg::MeshFamily::triangular, {8, 16, 32, 64}, {0, 0, 0}, 1.0, 1.0);
    auto k = final_rates(r);
    bool ok = near(k.energy, 0.0, 0.1) && near(k.l2, 0.0, 0.1) && near(k.edge, 2.0, 0.1);
    return {ok, fmt("final rates %.3f / %.3f / %.3f", k.energy, k.l2, k.edge)};
}

Outcome
criterion_4()
{
    auto r = study("cospi_cospi", gwg::MeshFamily::triangular, {8, 16, 32, 64}, {0, 0, 0}, 1.0, 0.0);
    return rates_within(r, {0.5, 1.0, 1.0}, 0.1);
}

Outcome
criterion_5()
{
    auto r = study("cospi_cospi", gwg::MeshFamily::rectangular, {4, 8, 16, 32, 64}, {3, 2, 2}, 1.0, -1.0);
    return rates_within(r, {3.0, 4.0, 4.0}, 0.1);
}

Outcome
criterion_6()
{
    auto r = study("lowreg", gwg::MeshFamily::triangular, {8, 16, 32, 64}, {1, 1, 0}, 1.0, -1.0, 0.5);
    return rates_within(r, {0.5, 1.5, 1.5}, 0.15);
}

Outcome
criterion_7()
{
    try
    {
        auto r = study("x2_cospi", gwg::MeshFamily::rectangular, {4, 8, 16, 32}, {2, 1, 3}, 0.0, -1.0);
        return rates_within(r, {3.0, 4.0, 4.0}, 0.15);
    }
    catch (const gwg::SingularSystem& err)
    {
        return {false, std::string("singular system: ") + err.what()};
    }
}

Outcome
criterion_8()
{
    const std::vector<gwg::Signature> sigs{{0, 0, 0}, {1, 0, 1}, {2, 1, 3}, {3, 4, 4}};
    const auto tri4 = gwg::build_uniform_triangular(4);
    const auto tri1 = gwg::build_uniform_triangular(1);
    std::string detail;
    bool ok = true;

    // (a) commutation identity, 50 random triples per signature.
    const double a = props::commutation_identity(tri4, sigs, 50, 20261016u);
    ok = ok && a <= 1e-10;
    detail += fmt("(a) %.1e", a, 0, 0);

    // (b) symmetry and positive definiteness for rho > 0 on n <= 4.
    double sym = 0.0, min_eig = INFINITY;
    for (std::size_t n : {1, 2, 3, 4})
        for (const auto& sig : sigs)
        {
            const auto mesh = gwg::build_uniform_triangular(n);
            auto c = props::check_matrix(mesh, sig, {});
            sym = std::max(sym, c.symmetry);
            min_eig = std::min(min_eig, c.min_eigen);
        }
    ok = ok && sym <= 1e-12 && min_eig > 0.0;
    detail += fmt(" (b) %.1e, min eig %.2e", sym, min_eig, 0);

    // (c) linear reproduction.
    double c = 0.0;
    for (double gamma : {-1.0, 0.0, 1.0})
    {
        gwg::SchemeParameters p;
        p.gamma = gamma;
        c = std::max(c, props::linear_reproduction(tri4, {1, 1, 0}, p).worst());
        c = std::max(c, props::linear_reproduction(gwg::build_uniform_rectangular(1), {1, 1, 0}, p).worst());
    }
    ok = ok && c <= 1e-9;
    detail += fmt(" (c) %.1e", c, 0, 0);

    // (d) brute-force oracle on the n = 1 mesh.
    double d = 0.0;
    for (const auto& sig : sigs)
        d = std::max(d, props::oracle_comparison(tri1, sig, 1.0, -1.0).worst());
    ok = ok && d <= 1e-12;
    detail += fmt(" (d) %.1e", d, 0, 0);

    // (e) delta_g vanishes on trace-consistent functions when j >= k.
    double e = 0.0;
    for (gwg::Signature sig : {gwg::Signature{0, 0, 0}, {1, 1, 0}, {1, 2, 1}, {2, 2, 3}, {3, 4, 4}})
    {
        e = std::max(e, props::delta_vanishing(tri4, sig, 3, 7u));
        e = std::max(e, props::delta_vanishing(gwg::build_uniform_rectangular(0), sig, 3, 11u));
    }
    ok = ok && e <= 1e-12;
    detail += fmt(" (e) %.1e", e, 0, 0);
    return {ok, detail};
}

} // namespace

int
main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 triangular P3/P4/[P4]^2 rates and reference errors", criterion_1},
        {"2 triangular P0/P1/[P1]^2, gamma=1, second order", criterion_2},
        {"3 triangular P0/P0/[P0]^2, gamma=1, stagnation", criterion_3},
        {"4 triangular P0/P0/[P0]^2, gamma=0, rates 0.5/1/1", criterion_4},
        {"5 rectangular P3/P2/[P2]^2 rates 3/4/4", criterion_5},
        {"6 corner singularity alpha=1/2, P1/P1/[P0]^2", criterion_6},
        {"7 rho=0 P2/P1/[P3]^2 rectangular, no breakdown", criterion_7},
        {"8 structural properties (a)-(e)", criterion_8},
    };

    int failures = 0;
    for (const auto& [name, fn] : criteria)
    {
        Outcome o;
        try
        {
            o = fn();
        }
        catch (const std::exception& err)
        {
            o = {false, std::string("exception: ") + err.what()};
        }
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
