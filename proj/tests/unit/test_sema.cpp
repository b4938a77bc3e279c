#include "lope/frontend/parser.hpp"
#include "lope/sema/checks.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace lope;
using namespace lope::frontend;
using namespace lope::sema;

namespace {

Program parse_ok(const std::string& src)
{
    auto r = parse_source(src, "t.lope");
    for (const auto& d : r.diagnostics.items())
        INFO(format_diagnostic(d));
    REQUIRE(r.diagnostics.empty());
    return r.program;
}

std::vector<Diagnostic> check_file(const std::string& path)
{
    auto r = parse_source(test::read_file(path), path);
    if (r.diagnostics.has_errors())
        return r.diagnostics.sorted();
    return analyze(r.program).diagnostics.sorted();
}

std::string kernel_src(const std::string& decl, const std::string& body)
{
    return "pure concurrent subroutine k(u)\n" + decl + "\n" + body + "\nend subroutine k\nprogram t\nend program t\n";
}

} // namespace

TEST_CASE("corpus programs check clean")
{
    for (const char* name : {"laplacian.lope", "average1d.lope", "asym.lope", "exchange.lope"}) {
        INFO(name);
        auto diags = check_file(test::corpus_path(name));
        for (const auto& d : diags)
            INFO(format_diagnostic(d));
        CHECK(diags.empty());
    }
}

TEST_CASE("each bad program yields exactly its diagnostic at the expected line")
{
    struct Case {
        const char* file;
        ErrorCode code;
        int line;
    };
    const Case cases[] = {
        {"halo_write.lope", ErrorCode::HaloWrite, 3},
        {"halo_bounds.lope", ErrorCode::HaloBoundsExceeded, 4},
        {"halo_bounds_call.lope", ErrorCode::HaloBoundsExceeded, 11},
        {"store_then_read.lope", ErrorCode::StoreThenHaloRead, 4},
        {"impure.lope", ErrorCode::ImpureKernel, 3},
        {"lex.lope", ErrorCode::Lex, 3},
        {"parse.lope", ErrorCode::Parse, 3},
        {"duplicate.lope", ErrorCode::DuplicateDecl, 3},
        {"undeclared.lope", ErrorCode::Undeclared, 3},
        {"halo_rank.lope", ErrorCode::ShapeMismatch, 2},
        {"corank.lope", ErrorCode::RankCorankMismatch, 2},
        {"missing_halo.lope", ErrorCode::MissingHalo, 4},
        {"device_var.lope", ErrorCode::DeviceVarNotSubimage, 11},
        {"alloc_shape.lope", ErrorCode::AllocShapeMismatch, 4},
    };
    for (const auto& c : cases) {
        INFO(c.file);
        auto diags = check_file(test::bad_path(c.file));
        for (const auto& d : diags)
            INFO(format_diagnostic(d));
        REQUIRE(diags.size() == 1);
        CHECK(diags[0].code == c.code);
        CHECK(diags[0].pos.line == c.line);
        CHECK(diags[0].pos.file == test::bad_path(c.file));
    }
}

TEST_CASE("symbol table records shape, halo and corank")
{
    Program p = parse_ok("program t\n"
                         "real, allocatable, dimension(:,:), codimension[:,:], HALO(1:*:1,1:*:1) :: U\n"
                         "real :: x\nend program t\n");
    auto st = build_symbol_table(p);
    CHECK(st.diagnostics.empty());
    const ArrayEntity* u = st.table.main.find("u");
    REQUIRE(u != nullptr);
    CHECK(u->rank == 2);
    CHECK(u->corank == 2);
    CHECK(u->allocatable);
    CHECK(u->alloc_state == AllocState::Unallocated);
    CHECK(u->halo->dims == std::vector<std::optional<HaloExtent>>{HaloExtent{1, 1}, HaloExtent{1, 1}});
    const ArrayEntity* x = st.table.main.find("x");
    REQUIRE(x != nullptr);
    CHECK(x->rank == 0);
    CHECK(!x->halo);
}

TEST_CASE("duplicate declaration reported at the second position")
{
    auto r = parse_source("program t\ninteger :: a, b\nreal :: c, a\nend program t\n", "d.lope");
    auto st = build_symbol_table(r.program);
    REQUIRE(st.diagnostics.size() == 1);
    CHECK(st.diagnostics.items()[0].code == ErrorCode::DuplicateDecl);
    CHECK(st.diagnostics.items()[0].pos.line == 3);
    CHECK(st.diagnostics.items()[0].pos.col == 12);
}

TEST_CASE("halo extent limit and rank limit")
{
    auto a = analyze(parse_ok("program t\nreal, dimension(:), halo(9:*:0) :: u\nend program t\n"));
    REQUIRE(a.diagnostics.size() == 1);
    CHECK(a.diagnostics.items()[0].code == ErrorCode::ShapeMismatch);
    auto b = analyze(parse_ok("program t\nreal, dimension(:,:,:,:) :: u\nend program t\n"));
    REQUIRE(b.diagnostics.size() == 1);
    CHECK(b.diagnostics.items()[0].code == ErrorCode::ShapeMismatch);
    auto c = analyze(parse_ok("program t\nreal, dimension(:), halo(8:*:8) :: u\nend program t\n"));
    CHECK(c.diagnostics.empty());
}

TEST_CASE("corpus footprints")
{
    auto fp = [](const char* file, const char* kernel, const char* array) {
        Program p = parse_ok(test::corpus(file));
        auto a = analyze(p);
        return a.footprints.at(kernel).at(array);
    };
    CHECK(fp("laplacian.lope", "laplacian", "u") == Footprint{{1, 1}, {1, 1}});
    CHECK(fp("average1d.lope", "average", "u") == Footprint{{1, 1}});
    CHECK(fp("asym.lope", "upwind", "u") == Footprint{{2, 0}, {1, 1}});
}

TEST_CASE("identity kernel has a zero footprint")
{
    auto a = analyze(parse_ok(kernel_src("real, halo(:) :: u", "u(0) = u(0)")));
    CHECK(a.diagnostics.empty());
    CHECK(a.footprints.at("k").at("u") == Footprint{{0, 0}});
}

TEST_CASE("reading the local element after storing it is allowed")
{
    auto a = analyze(parse_ok(kernel_src("real, halo(:) :: u", "u(0) = 2.0*u(-1)\nu(0) = u(0) + 1.0")));
    CHECK(a.diagnostics.empty());
}

TEST_CASE("same-statement halo read with the store is allowed")
{
    auto a = analyze(parse_ok(kernel_src("real, halo(:) :: u", "u(0) = u(1)")));
    CHECK(a.diagnostics.empty());
}

TEST_CASE("check_footprint")
{
    HaloSpec h11{{HaloExtent{1, 1}, HaloExtent{1, 1}}};
    CHECK(check_footprint({{1, 1}, {1, 1}}, h11, {}, "u").empty());
    auto d = check_footprint({{2, 0}}, HaloSpec{{HaloExtent{1, 1}}}, {}, "u");
    REQUIRE(d.size() == 1);
    CHECK(d.items()[0].code == ErrorCode::HaloBoundsExceeded);
    CHECK(d.items()[0].message.find("dimension 1") != std::string::npos);
    CHECK(check_footprint({{0, 0}}, HaloSpec{{HaloExtent{0, 0}}}, {}, "u").empty());
}

TEST_CASE("check_footprint is monotone in the actual halo")
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        int rank = 1 + static_cast<int>(rng() % 3);
        Footprint fp;
        HaloSpec small;
        HaloSpec large;
        for (int d = 0; d < rank; ++d) {
            fp.push_back({static_cast<int>(rng() % 4), static_cast<int>(rng() % 4)});
            int lo = static_cast<int>(rng() % 4);
            int hi = static_cast<int>(rng() % 4);
            small.dims.emplace_back(HaloExtent{lo, hi});
            large.dims.emplace_back(HaloExtent{lo + static_cast<int>(rng() % 3), hi + static_cast<int>(rng() % 3)});
        }
        if (check_footprint(fp, small, {}, "u").empty())
            CHECK(check_footprint(fp, large, {}, "u").empty());
    }
}

TEST_CASE("footprint equals the maximum over generated offsets")
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        int rank = 1 + static_cast<int>(rng() % 3);
        Footprint expected(static_cast<std::size_t>(rank));
        std::ostringstream body;
        int reads = 1 + static_cast<int>(rng() % 6);
        body << "u(";
        for (int d = 0; d < rank; ++d)
            body << (d ? ",0" : "0");
        body << ") = 0.0";
        for (int r = 0; r < reads; ++r) {
            body << " + u(";
            for (int d = 0; d < rank; ++d) {
                int o = static_cast<int>(rng() % 9) - 4;
                auto& e = expected[static_cast<std::size_t>(d)];
                if (o < 0)
                    e.max_neg = std::max(e.max_neg, -o);
                else
                    e.max_pos = std::max(e.max_pos, o);
                body << (d ? "," : "") << (o > 0 && rng() % 2 ? "+" : "") << o;
            }
            body << ")";
        }
        std::string halo = "halo(:";
        for (int d = 1; d < rank; ++d)
            halo += ",:";
        halo += ")";
        auto a = analyze(parse_ok(kernel_src("real, " + halo + " :: u", body.str())));
        CHECK(a.diagnostics.empty());
        CHECK(a.footprints.at("k").at("u") == expected);
    }
}

TEST_CASE("kernel purity rules")
{
    auto code = [](const std::string& decl, const std::string& body) {
        auto a = analyze(parse_ok(kernel_src(decl, body)));
        REQUIRE(a.diagnostics.size() >= 1);
        return a.diagnostics.items()[0].code;
    };
    CHECK(code("real, halo(:) :: u", "u(0) = this_image()") == ErrorCode::ImpureKernel);
    CHECK(code("real, halo(:) :: u", "call k(u)") == ErrorCode::ImpureKernel);
    CHECK(code("real, halo(:) :: u\nreal, dimension(4) :: t", "u(0) = u(0)") == ErrorCode::ImpureKernel);
    CHECK(code("real, halo(:) :: u", "u(0) = zz") == ErrorCode::Undeclared);
    CHECK(code("real, halo(:) :: u", "u(0,0) = u(0)") == ErrorCode::ShapeMismatch);
    CHECK(code("real, dimension(:) :: u", "u(0) = u(1)") == ErrorCode::MissingHalo);
}

TEST_CASE("host rules")
{
    const std::string k = "pure concurrent subroutine k(u)\nreal, halo(:,:) :: u\nu(0,0) = u(1,0)\nend subroutine\n";
    auto code = [&](const std::string& main) {
        auto a = analyze(parse_ok(k + "program t\ninteger :: m, n, dev\n" + main + "end program t\n"));
        REQUIRE(a.diagnostics.size() >= 1);
        return a.diagnostics.items()[0].code;
    };
    CHECK(code("real, allocatable, dimension(:,:), halo(1:*:1,1:*:1) :: v\n"
               "do concurrent (i=1:m, j=1:n)\ncall k(v(i,j))\nend do\n") == ErrorCode::RankCorankMismatch);
    CHECK(code("real, allocatable, dimension(:,:), codimension[:,:] :: v\n"
               "do concurrent (i=1:m, j=1:n)\ncall k(v(i,j))\nend do\n") == ErrorCode::MissingHalo);
    CHECK(code("real, allocatable, dimension(:,:), codimension[:,:], halo(1:*:1,1:*:1) :: v\n"
               "call k(v)\n") == ErrorCode::ImpureKernel);
    CHECK(code("real, allocatable, dimension(:,:), codimension[:,:], halo(1:*:1,1:*:1) :: v\n"
               "v = v[dev]\n") == ErrorCode::DeviceVarNotSubimage);
    CHECK(code("real, allocatable, dimension(:,:), codimension[:,:], halo(1:*:1,1:*:1) :: v\n"
               "dev = get_subimage(1)\nallocate(v[dev]) [[dev]]\n") == ErrorCode::AllocShapeMismatch);
    CHECK(code("real, dimension(:,:), codimension[:,:], halo(1:*:1,1:*:1) :: v\n"
               "allocate(v(0:m+1,0:n+1)[2,*])\n") == ErrorCode::AllocShapeMismatch);
    CHECK(code("real, allocatable, dimension(:,:), codimension[:,:], halo(1:*:1,1:*:1) :: v\n"
               "allocate(v(0:m+1,0:n+1)[*,2])\n") == ErrorCode::AllocShapeMismatch);
    CHECK(code("real, allocatable, dimension(:,:), codimension[:,:], halo(0:*:0,1:*:1) :: v\n"
               "do concurrent (i=1:m, j=1:n)\ncall k(v(i,j))\nend do\n") == ErrorCode::HaloBoundsExceeded);
    CHECK(code("real, allocatable, dimension(:,:), codimension[:,:], halo(1:*:1,1:*:1) :: v\n"
               "do concurrent (i=1:m, j=1:n)\ncall q(v(i,j))\nend do\n") == ErrorCode::Undeclared);
}

TEST_CASE("diagnostics are sorted by position")
{
    auto r = parse_source("pure concurrent subroutine k(u)\nreal, halo(:) :: u\nu(1) = 0.0\nend subroutine\n"
                          "program t\ninteger :: x\nx = y\nreal :: z\nend program\n",
                          "s.lope");
    auto a = analyze(r.program);
    auto items = a.diagnostics.items();
    for (std::size_t i = 1; i < items.size(); ++i)
        CHECK(!(items[i].pos < items[i - 1].pos));
}
