#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hotcat/run.hpp"

namespace {

// exit codes
constexpr int kParse = 1, kValidation = 2, kNumeric = 3, kIo = 4, kCheckMismatch = 5;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("hotcat");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("HOTCAT_LOG")) {
        const auto lvl = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only accept real ones
        if (lvl != spdlog::level::off || std::string(env) == "off")
            spdlog::set_level(lvl);
        else
            spdlog::warn("HOTCAT_LOG='{}' is not a log level, keeping warn", env);
    }
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"hot cat state simulator"};
    std::string mode, config_path, out_dir = ".";
    unsigned jobs = 0;
    bool check = false;
    app.add_option("mode", mode, "analytic | ideal | dynamics | fit-wigner-scale | fit-thermal | fit-hamiltonian")
        ->required();
    app.add_option("--config", config_path, "YAML run configuration")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads for grid evaluation (0: all cores)");
    app.add_flag("--check", check, "verify existing outputs instead of writing them");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParse;
    }

    try {
        std::ifstream in(config_path);
        if (!in) throw hotcat::IoError("cannot read config " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        const hotcat::RunConfig cfg = hotcat::parse_config(ss.str(), hotcat::parse_mode(mode));
        hotcat::RunContext ctx;
        ctx.out_dir = out_dir;
        ctx.base_dir = std::filesystem::path(config_path).parent_path();
        if (ctx.base_dir.empty()) ctx.base_dir = ".";
        ctx.jobs = jobs;
        ctx.check = check;
        const hotcat::RunReport rep = hotcat::run(cfg, ctx);
        std::cout << rep.to_json();
        if (check && !rep.mismatches.empty()) {
            for (const auto& m : rep.mismatches) spdlog::error("check failed: {} differs", m);
            return kCheckMismatch;
        }
        return 0;
    } catch (const hotcat::ParseError& e) {
        spdlog::error("{}", e.what());
        return kParse;
    } catch (const hotcat::ValidationError& e) {
        spdlog::error("invalid: {}", e.what());
        return kValidation;
    } catch (const hotcat::NumericError& e) {
        spdlog::error("numeric: {}", e.what());
        return kNumeric;
    } catch (const hotcat::IoError& e) {
        spdlog::error("io: {}", e.what());
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("io: {}", e.what());
        return kIo;
    }
}
