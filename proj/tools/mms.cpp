// mms: search, inspect and transform matrix multiplication schemes over GF(2).

#include <CLI11.hpp>

#include <cstdio>
#include <ctime>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mms/io.hpp"
#include "mms/search.hpp"
#include "mms/witness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

std::string utc_now() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

mms::Dims parse_dims(const std::string& text) {
    mms::Dims d{};
    char x1 = 0, x2 = 0;
    std::istringstream in(text);
    in >> d.n >> x1 >> d.m >> x2 >> d.p;
    if (in.fail() || x1 != 'x' || x2 != 'x')
        throw CLI::ValidationError("--dims", "expected the form NxMxP, e.g. 3x3x3");
    d.validate();
    return d;
}

std::vector<mms::ScheduleStage> parse_schedule_file(const std::string& path,
                                                    const mms::Dims& dims) {
    std::istringstream in(mms::read_text_file(path));
    std::vector<mms::ScheduleStage> stages;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        mms::ScheduleStage st;
        ls >> st.box.n1 >> st.box.m1 >> st.box.p1 >> st.iterations;
        if (ls.fail())
            throw mms::ParseError(line_no, "expected '<n> <m> <p> <iterations>'");
        st.box.validate(dims);
        stages.push_back(st);
    }
    if (stages.empty()) throw mms::ParseError(1, "schedule file has no stages");
    return stages;
}

struct SearchCli {
    std::string dims_text;
    std::uint64_t iters = 100000;
    std::uint64_t seed = 0;
    std::uint64_t plus_flag = 5000;
    bool no_plus = false;
    bool plus_in_stages = false;
    std::string schedule = "auto";
    std::uint32_t restarts = 1;
    std::uint64_t gr_period = 1000;
    std::uint64_t trace_stride = 1000;
    std::string init = "standard";
    std::string out, trace, checkpoint, resume;
    std::uint64_t checkpoint_every = 0;
    unsigned jobs = 1;
};

int run_search(const SearchCli& cli) {
    const mms::Dims dims = parse_dims(cli.dims_text);

    mms::SearchParams params;
    params.dims = dims;
    params.seed = cli.seed;
    params.plus_flag = cli.plus_flag;
    params.plus_enabled = !cli.no_plus;
    params.plus_in_constrained_stages = cli.plus_in_stages;
    params.restarts = cli.restarts;
    params.gr_period = cli.gr_period;
    params.trace_stride = cli.trace_stride;
    params.checkpoint_every = cli.checkpoint_every;
    params.checkpoint_path = cli.checkpoint.empty() ? cli.resume : cli.checkpoint;
    if (!params.checkpoint_path.empty() && params.checkpoint_every == 0)
        params.checkpoint_every = 100000;

    if (cli.schedule == "auto")
        params.schedule = mms::default_schedule(dims.n, dims.m, dims.p, cli.iters);
    else if (cli.schedule == "none")
        params.schedule = {{mms::Constraint{dims.n, dims.m, dims.p}, cli.iters}};
    else
        params.schedule = parse_schedule_file(cli.schedule, dims);

    const mms::Scheme initial = cli.init == "standard"
                                    ? mms::standard_scheme(dims.n, dims.m, dims.p)
                                    : mms::read_scheme_file(cli.init);

    mms::RunManifest manifest;
    manifest.params = params;
    manifest.schedule_origin = cli.schedule;
    manifest.init_origin = cli.init;
    manifest.started_at = utc_now();

    std::optional<mms::RunResult> best;
    if (!cli.resume.empty()) {
        mms::RunState state = mms::read_checkpoint(cli.resume);
        best = mms::resume(params, std::move(state));
        if (!cli.trace.empty()) mms::write_trace_file(best->stats, cli.trace);
    } else if (cli.jobs <= 1) {
        best = mms::run(params, initial);
        if (!cli.trace.empty()) mms::write_trace_file(best->stats, cli.trace);
    } else {
        // Independent seeded runs; only the final best-of reduction is shared.
        std::mutex mtx;
        std::vector<std::thread> workers;
        std::vector<std::optional<mms::RunResult>> results(cli.jobs);
        for (unsigned k = 0; k < cli.jobs; ++k) {
            workers.emplace_back([&, k] {
                mms::SearchParams job_params = params;
                job_params.seed = mms::Xoshiro256ss::child_seed(params.seed, k);
                if (!job_params.checkpoint_path.empty())
                    job_params.checkpoint_path += ".job" + std::to_string(k);
                mms::RunResult r = mms::run(job_params, initial);
                if (!cli.trace.empty())
                    mms::write_trace_file(r.stats, cli.trace + ".job" + std::to_string(k));
                const std::lock_guard<std::mutex> lock(mtx);
                results[k] = std::move(r);
            });
        }
        for (auto& w : workers) w.join();
        for (auto& r : results) {
            if (!r) continue;
            if (!best || r->best.rank() < best->best.rank()) best = std::move(*r);
        }
    }

    manifest.finished_at = utc_now();
    manifest.best_rank = best->best.rank();
    manifest.output_path = cli.out;

    std::cout << "best rank " << best->best.rank() << " after " << best->stats.iterations
              << " iterations (" << best->stats.flips << " flips, "
              << best->stats.pairwise_reductions + best->stats.general_reductions
              << " reductions, " << best->stats.plus_transitions << " plus transitions)\n";

    if (!cli.out.empty()) {
        mms::write_scheme_file(best->best, cli.out);
        mms::write_manifest_file(manifest, cli.out + ".manifest");
    }
    return kExitOk;
}

int run_verify(const std::string& path) {
    const mms::Scheme s = mms::read_scheme_file(path);  // parse re-verifies
    if (!mms::verify(s)) {
        std::cerr << "verification failed\n";
        return kExitValidation;
    }
    if (mms::brute_force_feasible(s.dims())) {
        if (!mms::brute_force_verify(s)) {
            std::cerr << "exhaustive evaluation disagrees with the tensor check\n";
            return kExitValidation;
        }
        std::cout << "valid (tensor check and exhaustive evaluation), rank " << s.rank()
                  << ", dims " << s.dims().n << 'x' << s.dims().m << 'x' << s.dims().p << '\n';
    } else {
        std::cout << "valid (tensor check), rank " << s.rank() << ", dims " << s.dims().n
                  << 'x' << s.dims().m << 'x' << s.dims().p << '\n';
    }
    return kExitOk;
}

int run_rank(const std::string& path) {
    std::cout << mms::read_scheme_file(path).rank() << '\n';
    return kExitOk;
}

int run_path(const std::string& from, const std::string& to, const std::string& out) {
    const mms::Scheme src = mms::read_scheme_file(from);
    const mms::Scheme dst = mms::read_scheme_file(to);
    const mms::MoveScript script = mms::connectivity_path(src, dst);
    mms::write_script_file(script, out);

    // Replay the written file as a self-check before reporting success.
    const mms::MoveScript reread = mms::read_script_file(out);
    const mms::Scheme end = mms::replay(src, reread, true);
    if (!(end == dst)) {
        std::cerr << "self-check failed: replay does not reach the target scheme\n";
        return kExitValidation;
    }
    std::cout << "path with " << script.moves.size() << " moves written to " << out
              << " and replayed\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flip graph search for matrix multiplication schemes over GF(2)"};
    app.require_subcommand(1);

    SearchCli sc;
    CLI::App* search = app.add_subcommand("search", "Run the adaptive rank search");
    search->add_option("--dims", sc.dims_text, "Product dimensions NxMxP")->required();
    search->add_option("--iters", sc.iters, "Total iterations per pass");
    search->add_option("--seed", sc.seed, "Run seed");
    search->add_option("--plus-flag", sc.plus_flag, "Stall length before a plus transition");
    search->add_flag("--no-plus", sc.no_plus, "Disable plus transitions");
    search->add_flag("--plus-in-stages", sc.plus_in_stages,
                     "Allow plus transitions in constrained stages too");
    search->add_option("--schedule", sc.schedule,
                       "auto, none, or a file with '<n> <m> <p> <iterations>' lines");
    search->add_option("--restarts", sc.restarts, "Chained passes over the schedule");
    search->add_option("--gr-period", sc.gr_period, "General-reduction attempt period");
    search->add_option("--trace-stride", sc.trace_stride, "Trace sampling stride");
    search->add_option("--init", sc.init, "standard or a scheme file");
    search->add_option("--out", sc.out, "Output scheme file");
    search->add_option("--trace", sc.trace, "Trace CSV file");
    search->add_option("--checkpoint", sc.checkpoint, "Checkpoint file");
    search->add_option("--checkpoint-every", sc.checkpoint_every,
                       "Iterations between checkpoints");
    search->add_option("--resume", sc.resume, "Resume from a checkpoint file");
    search->add_option("--jobs", sc.jobs, "Independent seeded runs in parallel")
        ->check(CLI::Range(1u, 256u));

    std::string verify_path;
    CLI::App* verify = app.add_subcommand("verify", "Validate a scheme file");
    verify->add_option("file", verify_path, "Scheme file")->required();

    std::string rank_path;
    CLI::App* rank = app.add_subcommand("rank", "Print the rank of a scheme file");
    rank->add_option("file", rank_path, "Scheme file")->required();

    std::string path_from, path_to, path_out;
    CLI::App* path = app.add_subcommand("path", "Build a move script between two schemes");
    path->add_option("from", path_from, "Source scheme file")->required();
    path->add_option("to", path_to, "Target scheme file")->required();
    path->add_option("out", path_out, "Output script file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*search) return run_search(sc);
        if (*verify) return run_verify(verify_path);
        if (*rank) return run_rank(rank_path);
        if (*path) return run_path(path_from, path_to, path_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitUsage;
}
