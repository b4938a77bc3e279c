#include "lope/driver.hpp"
#include "lope/runtime/distributed.hpp"
#include "lope/runtime/simulator.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <bit>
#include <random>
#include <set>

using namespace lope;
using namespace lope::runtime;
using lowering::StorageLayout;

namespace {

struct Built {
    Compilation c;
    lowering::HostPlan plan;
};

Built build(const std::string& src)
{
    Built b{compile(src, "t.lope"), {}};
    for (const auto& d : b.c.diagnostics.items())
        INFO(format_diagnostic(d));
    REQUIRE(b.c.ok());
    b.plan = plan(b.c);
    return b;
}

RunResult run(const Built& b, RunConfig cfg)
{
    return run_program(b.plan, b.c.analysis.symbols, cfg, b.c.program.main.pos);
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

std::int64_t pmod(std::int64_t x, std::int64_t n)
{
    return ((x % n) + n) % n;
}

int expected_code(const RuntimeError& e)
{
    return e.code ? static_cast<int>(*e.code) : -1;
}

const char* kHeader2d = "program t\ninteger :: m, n, mp, device, pcol, prow, me\n"
                        "real, allocatable, dimension(:,:), codimension[:,:], halo(1:*:1,1:*:1) :: u\n";

} // namespace

TEST_CASE("process grid mapping")
{
    ProcessGrid g = create_grid(4, 2);
    CHECK(g.cols == 2);
    CHECK(g.pcol(3) == 2);
    CHECK(g.prow(3) == 1);
    ProcessGrid one = create_grid(1, 1);
    CHECK(one.image_at(0, 0) == 1);
    CHECK(one.image_at(2, -5) == 1);
    try {
        create_grid(5, 2);
        FAIL("expected E201");
    } catch (const RuntimeError& e) {
        CHECK(expected_code(e) == 201);
    }
    CHECK_THROWS_AS(create_grid(0, 1), RuntimeError);
}

TEST_CASE("grid mapping is a bijection with cyclic neighbours")
{
    for (int p = 1; p <= 64; ++p) {
        for (int mp = 1; mp <= p; ++mp) {
            if (p % mp != 0)
                continue;
            ProcessGrid g = create_grid(p, mp);
            std::set<std::pair<int, int>> seen;
            std::set<int> right;
            for (int k = 1; k <= p; ++k) {
                CHECK(g.image_at(g.prow(k), g.pcol(k)) == k);
                seen.insert({g.prow(k), g.pcol(k)});
                right.insert(g.image_at(g.prow(k) + 1, g.pcol(k)));
                CHECK(image_of({g.rows, g.cols}, {g.prow(k), g.pcol(k)}) == k);
            }
            CHECK(seen.size() == static_cast<std::size_t>(p));
            CHECK(right.size() == static_cast<std::size_t>(p));
        }
    }
}

TEST_CASE("coarray allocation")
{
    ProcessGrid g = create_grid(4, 2);
    DistributedArray a = alloc_coarray(g, "u", 2, StorageLayout({8, 4}, {1, 1}, {1, 1}));
    REQUIRE(a.blocks.size() == 4);
    for (const auto& b : a.blocks) {
        CHECK(b.host.size() == 60);
        CHECK(std::all_of(b.host.begin(), b.host.end(), [](double x) { return x == 0.0; }));
    }
    DistributedArray z = alloc_coarray(create_grid(1, 1), "z", 1, StorageLayout({4}, {0}, {0}));
    CHECK(z.block(1).host.size() == 4);
    try {
        alloc_coarray(g, "u", 2, StorageLayout({1, 4}, {2, 0}, {0, 1}));
        FAIL("expected E108");
    } catch (const RuntimeError& e) {
        CHECK(expected_code(e) == 108);
    }
}

TEST_CASE("1-D halo transfer on two images")
{
    DistributedArray a = alloc_coarray(create_grid(2, 1), "u", 1, StorageLayout({4}, {1}, {1}));
    a.block(1).host = {0, 1, 2, 3, 4, 0};  // a b c d = 1..4
    a.block(2).host = {0, 5, 6, 7, 8, 0};  // e f g h = 5..8
    TransferCounters c;
    halo_transfer(a, c);
    CHECK(a.block(1).host == std::vector<double>{8, 1, 2, 3, 4, 5});
    CHECK(a.block(2).host == std::vector<double>{4, 5, 6, 7, 8, 1});
    CHECK(c.transfers == 1);
    CHECK(c.exchanged_cells == 4);

    DistributedArray s = alloc_coarray(create_grid(1, 1), "u", 1, StorageLayout({3}, {1}, {1}));
    s.block(1).host = {0, 1, 2, 3, 0};
    halo_transfer(s, c);
    CHECK(s.block(1).host == std::vector<double>{3, 1, 2, 3, 1});
}

TEST_CASE("2-D halo transfer equals the periodic global array")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    struct Case {
        StorageLayout layout;
        bool mirrored;
    };
    std::vector<Case> cases = {{StorageLayout({8, 4}, {1, 1}, {1, 1}), false},
                               {StorageLayout({8, 4}, {2, 1}, {0, 1}), false},
                               {StorageLayout({8, 4}, {1, 1}, {1, 1}), true},
                               {StorageLayout({8, 4}, {3, 2}, {1, 3}), true}};
    for (const auto& cs : cases) {
        for (int trial = 0; trial < 100; ++trial) {
            DistributedArray a = alloc_coarray(create_grid(4, 2), "u", 2, cs.layout);
            for (auto& b : a.blocks) {
                for (auto& x : b.host)
                    x = dist(rng);
                if (cs.mirrored) {
                    b.mirror = DeviceBuffer{5, true, b.host, 0};
                    for (auto& x : b.host)
                        x = 99.0; // stale host copy; the device is authoritative
                }
            }
            // Oracle input: interiors of the authoritative buffers.
            GlobalArray g(16, 8);
            for (int image = 1; image <= 4; ++image) {
                const auto& src = cs.mirrored ? a.block(image).mirror->data : a.block(image).host;
                auto co = image_coords(a.shape, image);
                for (std::int64_t j = 1; j <= 4; ++j)
                    for (std::int64_t i = 1; i <= 8; ++i)
                        g.at((co[0] - 1) * 8 + i, (co[1] - 1) * 4 + j) =
                            src[static_cast<std::size_t>(cs.layout.linear(std::vector<std::int64_t>{
                                i - 1 + cs.layout.halo_lo[0], j - 1 + cs.layout.halo_lo[1]}))];
            }
            TransferCounters c;
            halo_transfer(a, c);
            int halo_cells = 0;
            for (int image = 1; image <= 4; ++image) {
                auto co = image_coords(a.shape, image);
                const auto& buf = cs.mirrored ? a.block(image).mirror->data : a.block(image).host;
                for_each_cell(cs.layout, [&](const std::vector<std::int64_t>& s) {
                    std::int64_t i = s[0] - cs.layout.halo_lo[0] + 1;
                    std::int64_t j = s[1] - cs.layout.halo_lo[1] + 1;
                    std::int64_t gi = pmod((co[0] - 1) * 8 + i - 1, 16) + 1;
                    std::int64_t gj = pmod((co[1] - 1) * 4 + j - 1, 8) + 1;
                    bool halo = i < 1 || i > 8 || j < 1 || j > 4;
                    halo_cells += halo ? 1 : 0;
                    double got = buf[static_cast<std::size_t>(cs.layout.linear(s))];
                    if (got != g.at(gi, gj))
                        FAIL_CHECK("image " << image << " cell (" << i << "," << j << ")");
                });
            }
            CHECK(halo_cells == 4 * (cs.layout.cell_count() - 32));
            if (cs.mirrored) {
                CHECK(c.device_to_host_cells > 0);
                CHECK(c.host_to_device_cells == static_cast<std::uint64_t>(halo_cells));
            } else {
                CHECK(c.device_to_host_cells == 0);
            }
        }
    }
}

TEST_CASE("gather and scatter")
{
    GlobalArray g = random_global(4, 2, 3);
    ProcessGrid one = create_grid(1, 1);
    DistributedArray a = alloc_coarray(one, "u", 2, StorageLayout({4, 2}, {1, 1}, {1, 1}));
    scatter_global(a, g);
    CHECK(bitwise_equal(gather_global(a), g));

    // 2x1 grid of 2x2 blocks with distinct values.
    DistributedArray b = alloc_coarray(create_grid(2, 2), "u", 2, StorageLayout({2, 2}, {0, 0}, {0, 0}));
    b.block(1).host = {1, 2, 3, 4};
    b.block(2).host = {5, 6, 7, 8};
    GlobalArray out = gather_global(b);
    CHECK(out.m == 4);
    CHECK(out.n == 2);
    CHECK(out.data == std::vector<double>{1, 2, 5, 6, 3, 4, 7, 8});

    for (auto [p, mp] : {std::pair{4, 2}, std::pair{8, 2}, std::pair{2, 1}}) {
        GlobalArray r = random_global(16, 8, static_cast<std::uint64_t>(p * 10 + mp));
        ProcessGrid grid = create_grid(p, mp);
        DistributedArray d = alloc_coarray(grid, "u", 2,
                                           StorageLayout({16 / grid.rows, 8 / grid.cols}, {1, 2}, {2, 1}));
        scatter_global(d, r);
        CHECK(bitwise_equal(gather_global(d), r));
    }
    DistributedArray u = alloc_coarray(create_grid(2, 1), "u", 1, StorageLayout({2}, {0}, {0}));
    u.block(2).allocated = false;
    CHECK_THROWS_AS(gather_global(u), RuntimeError);
}

namespace {

lowering::KernelIR kernel_of(const std::string& file)
{
    Built b = build(test::corpus(file));
    return b.plan.kernels.begin()->second;
}

// One cyclic step on a single image: halo transfer, then a launch over the interior.
GlobalArray single_image_step(const lowering::KernelIR& ir, const GlobalArray& g, const LaunchOrder& order)
{
    DistributedArray a = alloc_coarray(create_grid(1, 1), "u", 2, StorageLayout({g.m, g.n}, {1, 1}, {1, 1}));
    scatter_global(a, g);
    TransferCounters c;
    halo_transfer(a, c);
    launch_concurrent(ir, {{&a.block(1).host, &a.layout}}, {1, 1}, {g.m, g.n}, {}, order);
    return gather_global(a);
}

} // namespace

TEST_CASE("Laplacian launch: constant field and point source")
{
    lowering::KernelIR ir = kernel_of("laplacian.lope");
    GlobalArray c(6, 6, 0.375);
    CHECK(bitwise_equal(single_image_step(ir, c, {}), c));

    GlobalArray point(4, 4, 0.0);
    point.at(2, 2) = 1.0;
    // Hand enumeration of u(0,1)+u(-1,0)-3u(0,0)+u(1,0)+u(0,-1) around one unit source.
    GlobalArray expected(4, 4, 0.0);
    expected.at(2, 2) = -3.0;
    expected.at(1, 2) = 1.0;
    expected.at(3, 2) = 1.0;
    expected.at(2, 1) = 1.0;
    expected.at(2, 3) = 1.0;
    CHECK(single_image_step(ir, point, {}) == expected);
    CHECK(oracle_step({point}, ir, 2)[0] == expected);
}

TEST_CASE("launch output does not depend on enumeration order")
{
    for (const auto* file : {"laplacian.lope", "asym.lope"}) {
        lowering::KernelIR ir = kernel_of(file);
        GlobalArray g = random_global(12, 10, 11);
        // asym needs a wider low halo in dim 1; build the layout from the footprint.
        StorageLayout l({12, 10}, {ir.footprints[0][0].max_neg, ir.footprints[0][1].max_neg},
                        {ir.footprints[0][0].max_pos, ir.footprints[0][1].max_pos});
        auto step = [&](LaunchOrder order) {
            DistributedArray a = alloc_coarray(create_grid(1, 1), "u", 2, l);
            scatter_global(a, g);
            launch_concurrent(ir, {{&a.block(1).host, &a.layout}}, {1, 1}, {12, 10}, {}, order);
            return a.block(1).host;
        };
        auto forward = step({Order::Forward, 0});
        CHECK(step({Order::Reverse, 0}) == forward);
        for (std::uint64_t seed = 0; seed < 20; ++seed)
            CHECK(step({Order::Shuffle, seed}) == forward);
    }
}

TEST_CASE("oracle_step on the identity kernel")
{
    Built b = build("pure concurrent subroutine k(u)\nreal, halo(:) :: u\nu(0) = u(0)\nend subroutine\n"
                    "program t\nend program\n");
    lowering::KernelIR ir = lowering::lower_kernel(b.c.program.kernels[0], b.c.analysis.symbols);
    GlobalArray g = random_global(9, 1, 5);
    CHECK(bitwise_equal(oracle_step({g}, ir, 1)[0], g));
}

TEST_CASE("array text format")
{
    GlobalArray g = random_global(3, 2, 1);
    g.at(1, 1) = 0.1;
    g.at(2, 1) = -0.0;
    std::string text = format_array_text(g);
    CHECK(text.rfind("3 2\n0.10000000000000001 -0 ", 0) == 0);
    CHECK(bitwise_equal(parse_array_text(text), g));
    CHECK(format_array_text(parse_array_text(text)) == text);
    CHECK_THROWS(parse_array_text("2 2\n1 2 3\n"));
    CHECK_THROWS(parse_array_text("2 1\n1 2 3\n"));
    CHECK_THROWS(parse_array_text("0 1\n"));
    CHECK_THROWS(parse_array_text("2 1\n1 x\n"));
}

TEST_CASE("program runs match repeated oracle steps")
{
    struct Prog {
        const char* file;
        int rank;
    };
    std::mt19937_64 rng(42);
    for (const Prog& p : {Prog{"laplacian.lope", 2}, Prog{"asym.lope", 2}, Prog{"average1d.lope", 1}}) {
        INFO(p.file);
        Built b = build(test::corpus(p.file));
        const lowering::KernelIR& ir = b.plan.kernels.begin()->second;
        for (int trial = 0; trial < 8; ++trial) {
            int grids[][2] = {{1, 1}, {2, 1}, {2, 2}, {4, 2}, {4, 4}, {8, 2}, {4, 1}, {8, 8}};
            int images = grids[trial][0];
            int rows = p.rank == 1 ? 1 : grids[trial][1];
            std::int64_t steps = static_cast<std::int64_t>(rng() % 65);
            GlobalArray g = p.rank == 1 ? random_global(32, 1, rng()) : random_global(16, 16, rng());
            RunConfig cfg;
            cfg.images = images;
            cfg.grid_rows = rows;
            cfg.steps = steps;
            cfg.devices = trial % 2;
            cfg.input = g;
            RunResult r = run(b, cfg);
            std::vector<GlobalArray> ref{g};
            for (std::int64_t k = 0; k < steps; ++k)
                ref = oracle_step(ref, ir, p.rank);
            INFO("P=" << images << " MP=" << rows << " K=" << steps);
            REQUIRE(r.output);
            CHECK(bitwise_equal(*r.output, ref[0]));
            CHECK(r.stats.stale_launches == 0);
            CHECK(r.stats.launches == static_cast<std::uint64_t>(steps * images));
            CHECK(r.stats.barriers == static_cast<std::uint64_t>(steps + 2));
        }
    }
}

TEST_CASE("subimage handles and fallback")
{
    Built b = build(test::corpus("laplacian.lope"));
    RunConfig cfg;
    cfg.images = 2;
    cfg.grid_rows = 1;
    cfg.steps = 3;
    cfg.input = random_global(8, 8, 3);

    cfg.devices = 1;
    RunResult dev = run(b, cfg);
    CHECK(dev.env[0].at("device").i == 3);
    CHECK(dev.env[1].at("device").i == 3);
    CHECK(dev.stats.device_launches == 6);
    CHECK(dev.stats.transfer.device_to_host_cells > 0);
    CHECK(dev.stats.transfer.host_to_device_cells > 0);
    CHECK(dev.stats.mirror_copies == 2);

    cfg.devices = 0;
    RunResult host = run(b, cfg);
    CHECK(host.env[0].at("device").i == 1);
    CHECK(host.env[1].at("device").i == 2);
    CHECK(host.stats.device_launches == 0);
    CHECK(host.stats.transfer.device_to_host_cells == 0);
    CHECK(host.stats.mirror_copies == 0);
    CHECK(bitwise_equal(*dev.output, *host.output));

    // get_subimage(2) with one device attached falls back to this_image().
    std::string src = test::corpus("laplacian.lope");
    src.replace(src.find("GET_SUBIMAGE(1)"), 15, "GET_SUBIMAGE(2)");
    cfg.devices = 1;
    RunResult fallback = run(build(src), cfg);
    CHECK(fallback.env[1].at("device").i == 2);
    CHECK(fallback.stats.device_launches == 0);
    CHECK(bitwise_equal(*fallback.output, *host.output));
}

TEST_CASE("mirror allocation and synchronisation")
{
    std::string head = std::string(kHeader2d) + "allocate(u(0:m+1,0:n+1)[mp,*])\ndevice = get_subimage(1)\n";
    RunConfig cfg;
    cfg.input = random_global(6, 4, 9);
    cfg.devices = 1;

    // Mirror holds a copy of the host block; syncing back changes nothing.
    RunResult r = run(build(head + "allocate(u[device], halo_src=u) [[device]]\nu = u[device]\n"
                                   "u[device] = u\nu = u[device]\ndeallocate(u)\nend program\n"),
                      cfg);
    CHECK(bitwise_equal(*r.output, *cfg.input));
    CHECK(r.stats.mirror_copies == 3);

    // Host writes after the mirror exists are not seen until hostToDevice.
    RunResult stale = run(build(head + "allocate(u[device], halo_src=u) [[device]]\nu = 2.0\nu = u[device]\n"
                                       "deallocate(u)\nend program\n"),
                          cfg);
    CHECK(bitwise_equal(*stale.output, *cfg.input));

    auto code_of = [&](const std::string& body, const RunConfig& c) {
        try {
            run(build(head + body + "end program\n"), c);
        } catch (const RuntimeError& e) {
            return std::pair{expected_code(e), e.pos.line};
        }
        return std::pair{0, 0};
    };
    CHECK(code_of("allocate(u[device], halo_src=u) [[device]]\nallocate(u[device], halo_src=u) [[device]]\n", cfg) ==
          std::pair{202, 7});
    CHECK(code_of("u = u[device]\n", cfg) == std::pair{202, 6});
    CHECK(code_of("allocate(u(0:m+1,0:n+1)[mp,*])\n", cfg) == std::pair{202, 6});
    CHECK(code_of("deallocate(u)\ndeallocate(u)\n", cfg) == std::pair{202, 7});

    // On the fallback handle every device action is a no-op.
    RunConfig none = cfg;
    none.devices = 0;
    CHECK(code_of("u = u[device]\nallocate(u[device], halo_src=u) [[device]]\n"
                  "allocate(u[device], halo_src=u) [[device]]\n",
                  none) == std::pair{0, 0});
}

TEST_CASE("allocation shape checks")
{
    RunConfig cfg;
    cfg.input = random_global(6, 4, 9);
    auto code_of = [&](const std::string& alloc, RunConfig c) {
        try {
            run(build(std::string(kHeader2d) + alloc + "end program\n"), c);
        } catch (const RuntimeError& e) {
            return expected_code(e);
        }
        return 0;
    };
    CHECK(code_of("allocate(u(1:m+1,0:n+1)[mp,*])\n", cfg) == 108);
    CHECK(code_of("allocate(u(0:m,0:n+1)[mp,*])\n", cfg) == 108);
    CHECK(code_of("allocate(u(0:m+1,0:n+1)[mp,*])\n", cfg) == 0);
    cfg.images = 4;
    cfg.grid_rows = 4;
    CHECK(code_of("allocate(u(0:m+1,0:n+1)[mp,*])\n", cfg) == 201); // 6 rows over 4 images
    cfg.grid_rows = 2;
    CHECK(code_of("allocate(u(0:m+1,0:n+1)[3,*])\n", cfg) == 201);
    cfg.images = 3;
    cfg.grid_rows = 2;
    CHECK(code_of("allocate(u(0:m+1,0:n+1)[mp,*])\n", cfg) == 201);
}

TEST_CASE("coindexed section copies")
{
    // Row 1 of every block takes row m of the block below it in dim 1.
    Built b = build(std::string(kHeader2d) + "allocate(u(0:m+1,0:n+1)[mp,*])\n"
                                             "me = this_image() - 1\nprow = me / mp + 1\npcol = me - (prow - 1)*mp + 1\n"
                                             "call halo_transfer(u, bc=cyclic)\nu(1,:) = u(m,:)[pcol-1,prow]\n"
                                             "call halo_transfer(u, bc=cyclic)\ndeallocate(u)\nend program\n");
    for (auto [p, mp] : {std::pair{1, 1}, std::pair{4, 2}, std::pair{2, 2}, std::pair{8, 4}}) {
        RunConfig cfg;
        cfg.images = p;
        cfg.grid_rows = mp;
        cfg.input = random_global(16, 8, 77);
        RunResult r = run(b, cfg);
        std::int64_t m = 16 / mp;
        GlobalArray expected = *cfg.input;
        for (std::int64_t j = 1; j <= 8; ++j)
            for (std::int64_t i = 1; i <= 16; i += m)
                expected.at(i, j) = cfg.input->at(pmod(i - 2, 16) + 1, j);
        INFO("P=" << p << " MP=" << mp);
        CHECK(bitwise_equal(*r.output, expected));
    }

    // exchange.lope refreshes halos only; the gathered interior is unchanged.
    RunConfig cfg;
    cfg.images = 4;
    cfg.grid_rows = 2;
    cfg.input = random_global(16, 8, 5);
    CHECK(bitwise_equal(*run(build(test::corpus("exchange.lope")), cfg).output, *cfg.input));

    Built bad = build(std::string(kHeader2d) + "allocate(u(0:m+1,0:n+1)[mp,*])\nu(1,:) = u(:,1)\nend program\n");
    cfg.input = random_global(6, 4, 1);
    cfg.images = 1;
    cfg.grid_rows = 1;
    CHECK_THROWS_AS(run(bad, cfg), RuntimeError);
}

TEST_CASE("steps 0 and missing input")
{
    Built b = build(test::corpus("laplacian.lope"));
    RunConfig cfg;
    cfg.steps = 0;
    cfg.images = 4;
    cfg.grid_rows = 2;
    cfg.input = random_global(8, 6, 2);
    CHECK(bitwise_equal(*run(b, cfg).output, *cfg.input));

    cfg.input.reset();
    RunResult r = run(b, cfg);
    CHECK(r.output->m == 32);
    CHECK(r.output->n == 32);
    CHECK(io_array_name(b.c.analysis.symbols) == std::optional<std::string>("u"));
}

TEST_CASE("images that diverge at a barrier are reported")
{
    Built b = build(std::string(kHeader2d) + "allocate(u(0:m+1,0:n+1)[mp,*])\n"
                                             "if (this_image() == 1) then\ncall halo_transfer(u, bc=cyclic)\nend if\n"
                                             "end program\n");
    RunConfig cfg;
    cfg.images = 2;
    cfg.input = random_global(4, 4, 1);
    try {
        run(b, cfg);
        FAIL("expected a runtime error");
    } catch (const RuntimeError& e) {
        CHECK(e.pos.line == 6);
    }
    cfg.images = 1;
    CHECK_NOTHROW(run(b, cfg));
}
