#include "lope/codegen/emit_c.hpp"
#include "lope/driver.hpp"
#include "lope/frontend/ast_dump.hpp"
#include "lope/runtime/simulator.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kOk = 0;
constexpr int kDiagnostics = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_payload(const std::string& path, const std::string& text)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write '" + path + "'");
    out << text;
}

bool report(const lope::Compilation& c)
{
    for (const auto& d : c.diagnostics.items())
        std::cerr << lope::format_diagnostic(d) << "\n";
    return c.ok();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Compiler and simulator for LOPe stencil programs", "lopec"};
    app.require_subcommand(1);

    std::string file;
    auto* check = app.add_subcommand("check", "Report diagnostics");
    check->add_option("FILE", file, "Source file")->required();

    auto* ast = app.add_subcommand("ast", "Print the AST term dump");
    ast->add_option("FILE", file, "Source file")->required();

    std::string target;
    std::string out_path;
    std::string real_type = "float";
    auto* emit = app.add_subcommand("emit", "Print kernel C or the host plan");
    emit->add_option("FILE", file, "Source file")->required();
    emit->add_option("--target", target, "kernel-c or plan")->required()->check(CLI::IsMember({"kernel-c", "plan"}));
    emit->add_option("-o", out_path, "Output file");
    emit->add_option("--real-type", real_type, "C type for reals")->check(CLI::IsMember({"float", "double"}));

    lope::runtime::RunConfig cfg;
    std::string input_path;
    std::string output_path;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Simulate the program");
    run->add_option("FILE", file, "Source file")->required();
    run->add_option("--images", cfg.images, "Image count P")->check(CLI::PositiveNumber);
    run->add_option("--grid-rows", cfg.grid_rows, "Process rows MP")->check(CLI::PositiveNumber);
    run->add_option("--devices", cfg.devices, "Subimages per image")->check(CLI::NonNegativeNumber);
    run->add_option("--steps", cfg.steps, "Value of nsteps")->check(CLI::NonNegativeNumber);
    run->add_option("--input", input_path, "Initial global array");
    run->add_option("--output", output_path, "Gathered result");
    run->add_option("--shuffle-seed", seed, "Shuffle launch enumeration with this seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        std::string source = read_text(file);
        if (ast->parsed()) {
            auto c = lope::compile(source, file);
            bool parse_failed = false;
            for (const auto& d : c.diagnostics.items())
                parse_failed = parse_failed || d.code == lope::ErrorCode::Lex || d.code == lope::ErrorCode::Parse;
            if (parse_failed) {
                report(c);
                return kDiagnostics;
            }
            std::cout << lope::frontend::dump_ast(c.program);
            return kOk;
        }

        auto c = lope::compile(source, file);
        if (!report(c))
            return kDiagnostics;
        if (check->parsed())
            return kOk;

        if (emit->parsed()) {
            std::string text;
            if (target == "plan") {
                text = lope::lowering::print_plan(lope::plan(c));
            } else {
                for (const auto& k : c.program.kernels) {
                    if (!text.empty())
                        text += "\n";
                    auto ir = lope::lowering::lower_kernel(k, c.analysis.symbols);
                    text += lope::codegen::emit_kernel_source(ir, lope::codegen::EmitConfig{real_type});
                }
            }
            write_payload(out_path, text);
            return kOk;
        }

        if (!input_path.empty()) {
            try {
                cfg.input = lope::runtime::parse_array_text(read_text(input_path));
            } catch (const UsageError&) {
                throw;
            } catch (const std::exception& e) {
                std::cerr << input_path << ": " << e.what() << "\n";
                return kRuntime;
            }
        }
        if (seed)
            cfg.order = {lope::runtime::Order::Shuffle, *seed};
        auto result = lope::runtime::run_program(lope::plan(c), c.analysis.symbols, cfg, c.program.main.pos);
        if (!result.output) {
            if (!output_path.empty()) {
                std::cerr << file << ": error: the program leaves no array to write\n";
                return kRuntime;
            }
            return kOk;
        }
        write_payload(output_path, lope::runtime::format_array_text(*result.output));
        return kOk;
    } catch (const UsageError& e) {
        std::cerr << "lopec: " << e.what() << "\n";
        return kUsage;
    } catch (const lope::runtime::RuntimeError& e) {
        std::cerr << lope::runtime::format_runtime_error(e) << "\n";
        return kRuntime;
    } catch (const lope::codegen::UnsupportedType& e) {
        std::cerr << file << ": error: " << e.what() << "\n";
        return kDiagnostics;
    } catch (const std::exception& e) {
        std::cerr << "lopec: internal error: " << e.what() << "\n";
        return kRuntime;
    }
}
