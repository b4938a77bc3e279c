#include "../unit/kernel_check.hpp"
#include "../unit/test_support.hpp"
#include "lope/driver.hpp"
#include "lope/runtime/distributed.hpp"
#include "lope/runtime/simulator.hpp"

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <regex>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace lope;
using namespace lope::runtime;
using lowering::StorageLayout;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why)
    {
        if (pass)
            detail.clear();
        else
            detail += "; ";
        pass = false;
        detail += why;
    }
};

struct Program {
    std::string file;
    Compilation c;
    lowering::HostPlan plan;
};

Program load(const std::string& file, const std::string& source)
{
    Program p{file, compile(source, file), {}};
    if (!p.c.ok())
        throw std::runtime_error(file + " does not compile");
    p.plan = lope::plan(p.c);
    return p;
}

Program load_corpus(const std::string& name)
{
    return load(test::corpus_path(name), test::corpus(name));
}

GlobalArray random_global(std::int64_t m, std::int64_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GlobalArray g(m, n);
    for (auto& x : g.data)
        x = dist(rng);
    return g;
}

bool bitwise_equal(const GlobalArray& a, const GlobalArray& b)
{
    if (a.m != b.m || a.n != b.n)
        return false;
    for (std::size_t k = 0; k < a.data.size(); ++k)
        if (std::bit_cast<std::uint64_t>(a.data[k]) != std::bit_cast<std::uint64_t>(b.data[k]))
            return false;
    return true;
}

double max_abs_diff(const GlobalArray& a, const GlobalArray& b)
{
    if (a.m != b.m || a.n != b.n)
        return std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k)
        d = std::max(d, std::fabs(a.data[k] - b.data[k]));
    return d;
}

std::int64_t pmod(std::int64_t x, std::int64_t n)
{
    return ((x % n) + n) % n;
}

std::string scratch(const std::string& name)
{
    auto dir = std::filesystem::path(LOPE_SCRATCH_DIR);
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

struct Cli {
    int code = -1;
    std::string err;
};

Cli lopec(const std::string& args)
{
    std::string err_file = scratch("stderr_" + std::to_string(getpid()) + ".txt");
    std::string cmd = std::string(LOPEC_PATH) + " " + args + " >/dev/null 2>" + err_file;
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr)
        return {};
    int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, test::read_file(err_file)};
}

std::string write_array(const std::string& name, const GlobalArray& g)
{
    std::string path = scratch(name);
    std::ofstream(path) << format_array_text(g);
    return path;
}

// The three kernels of the oracle, order and device criteria, with the
// global extents they run on.
struct Subject {
    const char* file;
    std::int64_t m;
    std::int64_t n;
};

const Subject kSubjects[] = {{"laplacian.lope", 32, 32}, {"average1d.lope", 64, 1}, {"asym.lope", 32, 32}};

struct Grid {
    int images;
    int rows;
};

std::string grid_flags(Grid g)
{
    return " --images " + std::to_string(g.images) + " --grid-rows " + std::to_string(g.rows);
}

// Runs `file` through the CLI and returns the output file contents, or an
// empty string when the run fails.
std::string cli_output(const std::string& file, const std::string& input, const std::string& flags,
                       const std::string& tag, Verdict& v)
{
    std::string out = scratch(tag + ".out");
    std::filesystem::remove(out);
    Cli r = lopec("run " + file + " --input " + input + " --steps 20" + flags + " --output " + out);
    if (r.code != 0) {
        v.fail(tag + ": exit " + std::to_string(r.code) + " " + r.err);
        return {};
    }
    return test::read_file(out);
}

Verdict criterion_1()
{
    Verdict v;
    for (const char* name : {"laplacian.lope", "average1d.lope", "asym.lope", "exchange.lope"}) {
        Compilation c = compile(test::corpus(name), name);
        if (!c.diagnostics.items().empty())
            v.fail(std::string(name) + ": " + format_diagnostic(c.diagnostics.items().front()));
    }
    struct Bad {
        const char* file;
        ErrorCode code;
        int line;
    };
    for (const Bad& b : {Bad{"halo_write.lope", ErrorCode::HaloWrite, 3},
                         Bad{"halo_bounds.lope", ErrorCode::HaloBoundsExceeded, 4},
                         Bad{"store_then_read.lope", ErrorCode::StoreThenHaloRead, 4},
                         Bad{"impure.lope", ErrorCode::ImpureKernel, 3}}) {
        std::string path = test::bad_path(b.file);
        auto diags = compile(test::read_file(path), path).diagnostics.sorted();
        if (diags.size() != 1 || diags[0].code != b.code || diags[0].pos.line != b.line) {
            v.fail(std::string(b.file) + ": expected " + code_name(b.code) + " at line " + std::to_string(b.line) +
                   ", got " + (diags.empty() ? std::string("nothing") : format_diagnostic(diags[0])));
        }
    }
    if (v.pass)
        v.detail = "4 corpus programs clean; E101/E102/E103/E104 at lines 3/4/4/3";
    return v;
}

Verdict criterion_2()
{
    Verdict v;
    Program p = load_corpus("laplacian.lope");
    const double c = 0.625;
    RunConfig cfg;
    cfg.steps = 20;
    cfg.input = GlobalArray(32, 32, c);
    RunResult r = run_program(p.plan, p.c.analysis.symbols, cfg, p.c.program.main.pos);
    if (!r.output || !bitwise_equal(*r.output, *cfg.input))
        v.fail("constant field changed");
    else
        v.detail = "32x32 field of 0.625 unchanged after 20 steps";
    return v;
}

Verdict criterion_3()
{
    Verdict v;
    const Grid grids2[] = {{1, 1}, {2, 1}, {2, 2}, {4, 2}};
    const Grid grids1[] = {{1, 1}, {2, 1}, {4, 1}, {8, 1}};
    int trials = 0;
    int bitwise = 0;
    double worst = 0.0;
    std::uint64_t seed = 1000;
    for (const Subject& s : kSubjects) {
        Program p = load_corpus(s.file);
        const lowering::KernelIR& ir = p.plan.kernels.begin()->second;
        int rank = s.n == 1 ? 1 : 2;
        for (std::int64_t k : {1, 5, 20}) {
            for (int t = 0; t < 12; ++t) {
                RunConfig cfg;
                Grid g = rank == 1 ? grids1[t % 4] : grids2[t % 4];
                cfg.images = g.images;
                cfg.grid_rows = g.rows;
                cfg.devices = (t / 4) % 2;
                cfg.steps = k;
                cfg.input = random_global(s.m, s.n, ++seed);
                RunResult r = run_program(p.plan, p.c.analysis.symbols, cfg, p.c.program.main.pos);
                GlobalArray expect = *cfg.input;
                for (std::int64_t step = 0; step < k; ++step)
                    expect = oracle_step({expect}, ir, rank).at(0);
                ++trials;
                if (!r.output) {
                    v.fail(std::string(s.file) + ": no output");
                    continue;
                }
                double d = max_abs_diff(*r.output, expect);
                worst = std::max(worst, d);
                if (bitwise_equal(*r.output, expect))
                    ++bitwise;
                else if (!(d <= 1e-12))
                    v.fail(std::string(s.file) + " K=" + std::to_string(k) + ": max abs diff " + std::to_string(d));
            }
        }
    }
    if (v.pass) {
        std::ostringstream msg;
        msg << trials << " trials, " << bitwise << " bitwise equal, max abs diff " << worst;
        v.detail = msg.str();
    }
    return v;
}

Verdict criterion_4()
{
    Verdict v;
    int compared = 0;
    bool identical = true;
    for (const Subject& s : kSubjects) {
        std::string file = test::corpus_path(s.file);
        std::string input = write_array(std::string("c4_") + s.file + ".in", random_global(s.m, s.n, 44));
        std::string base = cli_output(file, input, grid_flags({1, 1}), "c4_p1", v);
        for (Grid g : {Grid{2, 1}, Grid{4, 2}}) {
            std::string got = cli_output(file, input, grid_flags(g), "c4_p" + std::to_string(g.images), v);
            ++compared;
            if (!base.empty() && got != base) {
                identical = false;
                v.fail(std::string(s.file) + grid_flags(g) + ": output differs from P=1");
            }
        }
        Cli r = lopec("run " + file + " --input " + input + " --steps 20" + grid_flags({2, 2}));
        if (r.code != 3 || r.err.find("error[E201]") == std::string::npos) {
            v.fail(std::string(s.file) + " P=2 MP=2: expected E201 rejection, got exit " + std::to_string(r.code) +
                   " (MP=2 divides P=2, a valid 2x1 grid)");
        }
    }
    if (v.pass)
        v.detail = std::to_string(compared) + " decomposed runs byte-identical; P=2 MP=2 rejected with E201";
    else if (identical)
        v.detail += "; the " + std::to_string(compared) + " valid decompositions are byte-identical";
    return v;
}

Verdict criterion_5()
{
    Verdict v;
    int compared = 0;
    for (const Subject& s : kSubjects) {
        std::string file = test::corpus_path(s.file);
        std::string input = write_array(std::string("c5_") + s.file + ".in", random_global(s.m, s.n, 55));
        for (Grid g : {Grid{1, 1}, Grid{4, s.n == 1 ? 1 : 2}}) {
            std::string host = cli_output(file, input, grid_flags(g) + " --devices 0", "c5_host", v);
            std::string dev = cli_output(file, input, grid_flags(g) + " --devices 1", "c5_dev", v);
            ++compared;
            if (host.empty() || dev != host)
                v.fail(std::string(s.file) + grid_flags(g) + ": devices 1 differs from devices 0");
            std::string fallback_src =
                std::regex_replace(test::corpus(s.file), std::regex("get_subimage\\(1\\)", std::regex::icase),
                                   "get_subimage(2)");
            std::string fallback_file = scratch(std::string("c5_fallback_") + s.file);
            std::ofstream(fallback_file) << fallback_src;
            std::string fb = cli_output(fallback_file, input, grid_flags(g) + " --devices 1", "c5_fb", v);
            ++compared;
            if (fb != host)
                v.fail(std::string(s.file) + grid_flags(g) + ": GET_SUBIMAGE(2) fallback differs");
        }
        // The device run must actually take the device path, and the fallback must not.
        Program p = load_corpus(s.file);
        RunConfig cfg;
        cfg.images = 2;
        cfg.devices = 1;
        cfg.steps = 3;
        cfg.input = random_global(s.m, s.n, 56);
        RunStats st = run_program(p.plan, p.c.analysis.symbols, cfg, p.c.program.main.pos).stats;
        if (st.device_launches != 6 || st.transfer.device_to_host_cells == 0 ||
            st.transfer.host_to_device_cells == 0 || st.stale_launches != 0)
            v.fail(std::string(s.file) + ": device path not exercised");
    }
    if (v.pass)
        v.detail = std::to_string(compared) + " device and fallback runs byte-identical to host runs";
    return v;
}

Verdict criterion_6()
{
    Verdict v;
    int runs = 0;
    for (const Subject& s : kSubjects) {
        std::string file = test::corpus_path(s.file);
        std::string input = write_array(std::string("c6_") + s.file + ".in", random_global(s.m, s.n, 66));
        Grid g{2, s.n == 1 ? 1 : 2};
        std::string base = cli_output(file, input, grid_flags(g), "c6_base", v);
        for (int seed = 1; seed <= 20; ++seed) {
            std::string got =
                cli_output(file, input, grid_flags(g) + " --shuffle-seed " + std::to_string(seed), "c6_seed", v);
            ++runs;
            if (base.empty() || got != base) {
                v.fail(std::string(s.file) + " seed " + std::to_string(seed) + ": output differs");
                break;
            }
        }
    }
    if (v.pass)
        v.detail = std::to_string(runs) + " shuffled runs byte-identical";
    return v;
}

Verdict criterion_7()
{
    Verdict v;
    const StorageLayout layout({8, 4}, {1, 1}, {1, 1});
    const double sentinel = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        bool mirrored = trial % 2 == 1;
        GlobalArray g = random_global(16, 8, 7000 + static_cast<std::uint64_t>(trial));
        DistributedArray a = alloc_coarray(create_grid(4, 2), "u", 2, layout);
        for (int image = 1; image <= 4; ++image) {
            auto co = image_coords(a.shape, image);
            std::vector<double> buf(static_cast<std::size_t>(layout.cell_count()), sentinel);
            for (std::int64_t j = 1; j <= 4; ++j)
                for (std::int64_t i = 1; i <= 8; ++i)
                    buf[static_cast<std::size_t>(layout.linear(std::vector<std::int64_t>{i, j}))] =
                        g.at((co[0] - 1) * 8 + i, (co[1] - 1) * 4 + j);
            if (mirrored)
                a.block(image).mirror = DeviceBuffer{4 + image, true, buf, 0};
            a.block(image).host = mirrored ? std::vector<double>(buf.size(), sentinel) : buf;
        }
        TransferCounters c;
        halo_transfer(a, c);
        for (int image = 1; image <= 4; ++image) {
            auto co = image_coords(a.shape, image);
            const auto& buf = mirrored ? a.block(image).mirror->data : a.block(image).host;
            int halo = 0;
            for_each_cell(layout, [&](const std::vector<std::int64_t>& s) {
                std::int64_t i = s[0];
                std::int64_t j = s[1];
                if (i >= 1 && i <= 8 && j >= 1 && j <= 4)
                    return;
                ++halo;
                double want = g.at(pmod((co[0] - 1) * 8 + i - 1, 16) + 1, pmod((co[1] - 1) * 4 + j - 1, 8) + 1);
                double got = buf[static_cast<std::size_t>(layout.linear(s))];
                if (std::bit_cast<std::uint64_t>(got) != std::bit_cast<std::uint64_t>(want) && v.pass) {
                    v.fail("trial " + std::to_string(trial) + " image " + std::to_string(image) + " halo cell (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
                }
            });
            checked += static_cast<std::uint64_t>(halo);
            if (halo != 2 * (8 + 4) + 4)
                v.fail("block has " + std::to_string(halo) + " halo cells");
        }
    }
    if (v.pass)
        v.detail = std::to_string(checked) + " halo cells over 100 trials equal the periodic oracle";
    return v;
}

Verdict criterion_8()
{
    Verdict v;
    std::uint64_t seed = 80;
    for (const auto& [file, golden] : {std::pair{"laplacian.lope", "laplacian.cl.golden"},
                                       std::pair{"average1d.lope", "average.cl.golden"},
                                       std::pair{"asym.lope", "upwind.cl.golden"}}) {
        Program p = load_corpus(file);
        const lowering::KernelIR& ir = p.plan.kernels.begin()->second;
        if (codegen::emit_kernel_source(ir) != test::read_file(std::string(LOPE_TEST_DIR) + "/golden/" + golden))
            v.fail(std::string(file) + ": differs from " + golden);
        std::string mismatch = test::equivalence_mismatch(ir, ++seed, 100);
        if (!mismatch.empty())
            v.fail(std::string(file) + ": " + mismatch);
    }
    if (v.pass)
        v.detail = "3 goldens byte-identical; emitted C equals IR on 3x100 random inputs";
    return v;
}

// Interior points map one-to-one onto the interior region of storage, every
// offset inside the halo maps in bounds, and at the last interior point the
// first offset past the halo throws.
bool check_layout(const StorageLayout& l, std::vector<char>& seen, std::string& why)
{
    const int rank = l.rank();
    seen.assign(static_cast<std::size_t>(l.cell_count()), 0);
    std::array<std::int64_t, 2> c{1, 1};
    std::array<std::int64_t, 2> o{0, 0};
    const std::int64_t n1 = rank == 2 ? l.extent[1] : 1;
    for (c[1] = 1; c[1] <= n1; ++c[1]) {
        for (c[0] = 1; c[0] <= l.extent[0]; ++c[0]) {
            std::span<const std::int64_t> center(c.data(), static_cast<std::size_t>(rank));
            std::span<const std::int64_t> offs(o.data(), static_cast<std::size_t>(rank));
            o = {0, 0};
            std::int64_t idx = lowering::map_local_to_global(offs, center, l);
            if (idx < 0 || idx >= l.cell_count() || seen[static_cast<std::size_t>(idx)]++ != 0) {
                why = "interior collision";
                return false;
            }
            auto back = l.coords_of(idx);
            for (int d = 0; d < rank; ++d) {
                if (back[static_cast<std::size_t>(d)] != c[static_cast<std::size_t>(d)] - 1 + l.halo_lo[d]) {
                    why = "interior not in the interior region";
                    return false;
                }
            }
            const std::int64_t lo1 = rank == 2 ? -l.halo_lo[1] : 0;
            const std::int64_t hi1 = rank == 2 ? l.halo_hi[1] : 0;
            for (o[1] = lo1; o[1] <= hi1; ++o[1]) {
                for (o[0] = -l.halo_lo[0]; o[0] <= l.halo_hi[0]; ++o[0]) {
                    std::int64_t k = lowering::map_local_to_global(offs, center, l);
                    if (k < 0 || k >= l.cell_count()) {
                        why = "footprint offset out of bounds";
                        return false;
                    }
                }
            }
            bool last = c[0] == l.extent[0] && c[1] == n1;
            for (int d = 0; d < rank && last; ++d) {
                o = {0, 0};
                o[static_cast<std::size_t>(d)] = l.halo_hi[d] + 1;
                try {
                    lowering::map_local_to_global(offs, center, l);
                    why = "offset past the halo accepted";
                    return false;
                } catch (const std::out_of_range&) {
                }
            }
            o = {0, 0};
        }
    }
    return true;
}

Verdict criterion_9()
{
    Verdict v;
    std::vector<char> seen;
    std::string why;
    std::uint64_t layouts = 0;
    for (std::int64_t m = 1; m <= 16 && v.pass; ++m) {
        for (std::int64_t lo = 0; lo <= 3; ++lo) {
            for (std::int64_t hi = 0; hi <= 3; ++hi) {
                ++layouts;
                if (!check_layout(StorageLayout({m}, {lo}, {hi}), seen, why))
                    v.fail("rank 1 m=" + std::to_string(m) + ": " + why);
                for (std::int64_t n = 1; n <= 16; ++n) {
                    for (std::int64_t lo1 = 0; lo1 <= 3; ++lo1) {
                        for (std::int64_t hi1 = 0; hi1 <= 3; ++hi1) {
                            ++layouts;
                            if (!check_layout(StorageLayout({m, n}, {lo, lo1}, {hi, hi1}), seen, why) && v.pass)
                                v.fail("rank 2 " + std::to_string(m) + "x" + std::to_string(n) + ": " + why);
                        }
                    }
                }
            }
        }
    }
    if (v.pass)
        v.detail = std::to_string(layouts) + " layouts enumerated";
    return v;
}

struct Criterion {
    int number;
    const char* title;
    double budget_s; // 0 = no stated limit
    std::function<Verdict()> run;
};

const Criterion kCriteria[] = {
    {1, "corpus parse/check", 1.0, criterion_1},
    {2, "fixed point", 1.0, criterion_2},
    {3, "oracle equivalence", 30.0, criterion_3},
    {4, "decomposition invariance", 10.0, criterion_4},
    {5, "device transparency", 10.0, criterion_5},
    {6, "order invariance", 0.0, criterion_6},
    {7, "halo-exchange oracle", 0.0, criterion_7},
    {8, "codegen goldens", 0.0, criterion_8},
    {9, "index-mapping exhaustion", 5.0, criterion_9},
};

bool report(const Criterion& c)
{
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = c.run();
    } catch (const std::exception& e) {
        v.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s)
        v.fail("took " + std::to_string(secs) + " s, limit " + std::to_string(c.budget_s) + " s");
    std::printf("criterion %d %s: %s (%.2f s) %s\n", c.number, c.title, v.pass ? "PASS" : "FAIL", secs,
                v.detail.c_str());
    std::fflush(stdout);
    return v.pass;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<int> wanted;
    for (int k = 1; k < argc; ++k)
        wanted.push_back(std::atoi(argv[k]));
    bool ok = true;
    for (const auto& c : kCriteria)
        if (wanted.empty() || std::find(wanted.begin(), wanted.end(), c.number) != wanted.end())
            ok = report(c) && ok;
    return ok ? 0 : 1;
}
