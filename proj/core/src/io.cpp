#include "mms/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mms {

namespace {

constexpr const char* kArtifactVersion = "1.0.0";
constexpr const char* kRngAlgorithm = "xoshiro256ss-splitmix64";

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

BitVector parse_component(const std::string& token, int expected_len, int line_no,
                          const char* name) {
    if (static_cast<int>(token.size()) != expected_len)
        throw ParseError(line_no, std::string(name) + " bit string has length " +
                                      std::to_string(token.size()) + ", expected " +
                                      std::to_string(expected_len));
    std::uint64_t bits = 0;
    for (std::size_t q = 0; q < token.size(); ++q) {
        if (token[q] == '1')
            bits |= 1ull << q;
        else if (token[q] != '0')
            throw ParseError(line_no, std::string(name) + " bit string contains '" +
                                          token[q] + "'; only 0 and 1 are allowed");
    }
    if (bits == 0) throw ParseError(line_no, std::string(name) + " component is zero");
    return BitVector(expected_len, bits);
}

Slot parse_slot(const std::string& token, int line_no) {
    if (token == "alpha") return Slot::Alpha;
    if (token == "beta") return Slot::Beta;
    if (token == "gamma") return Slot::Gamma;
    throw ParseError(line_no, "unknown slot '" + token + "'");
}

}  // namespace

std::string serialize_scheme(const Scheme& s) {
    std::ostringstream out;
    out << "mms 1\n";
    out << "dims " << s.dims().n << ' ' << s.dims().m << ' ' << s.dims().p << '\n';
    out << "rank " << s.rank() << '\n';
    for (const Term& t : s.terms())
        out << t.alpha.to_string() << ' ' << t.beta.to_string() << ' ' << t.gamma.to_string()
            << '\n';
    return out.str();
}

Scheme parse_scheme(const std::string& text) {
    const std::vector<std::string> lines = split_lines(text);
    if (lines.empty() || lines[0] != "mms 1")
        throw ParseError(1, "malformed header, expected 'mms 1'");

    if (lines.size() < 2) throw ParseError(2, "missing 'dims' line");
    Dims d{};
    {
        std::istringstream ls(lines[1]);
        std::string tag;
        ls >> tag >> d.n >> d.m >> d.p;
        if (tag != "dims" || ls.fail())
            throw ParseError(2, "malformed dims line, expected 'dims <n> <m> <p>'");
        try {
            d.validate();
        } catch (const std::exception& e) {
            throw ParseError(2, e.what());
        }
    }

    if (lines.size() < 3) throw ParseError(3, "missing 'rank' line");
    long long rank = -1;
    {
        std::istringstream ls(lines[2]);
        std::string tag;
        ls >> tag >> rank;
        if (tag != "rank" || ls.fail() || rank < 0)
            throw ParseError(3, "malformed rank line, expected 'rank <r>'");
    }

    std::vector<Term> terms;
    terms.reserve(static_cast<std::size_t>(rank));
    for (long long i = 0; i < rank; ++i) {
        const int line_no = static_cast<int>(4 + i);
        if (static_cast<std::size_t>(line_no - 1) >= lines.size())
            throw ParseError(line_no, "missing term line (file claims rank " +
                                          std::to_string(rank) + ")");
        std::istringstream ls(lines[static_cast<std::size_t>(line_no - 1)]);
        std::string a, b, g, extra;
        ls >> a >> b >> g;
        if (ls.fail()) throw ParseError(line_no, "term line needs three bit strings");
        if (ls >> extra) throw ParseError(line_no, "unexpected trailing token on term line");
        terms.push_back({parse_component(a, d.nm(), line_no, "alpha"),
                         parse_component(b, d.mp(), line_no, "beta"),
                         parse_component(g, d.pn(), line_no, "gamma")});
    }

    for (std::size_t extra_line = static_cast<std::size_t>(3 + rank); extra_line < lines.size();
         ++extra_line) {
        if (!lines[extra_line].empty())
            throw ParseError(static_cast<int>(extra_line + 1), "unexpected trailing content");
    }

    Scheme s(d, std::move(terms));
    if (!verify(s))
        throw ParseError(static_cast<int>(3 + rank),
                         "scheme does not sum to the multiplication tensor");
    return s;
}

Scheme read_scheme_file(const std::string& path) { return parse_scheme(read_text_file(path)); }

void write_scheme_file(const Scheme& s, const std::string& path) {
    write_text_file_atomic(path, serialize_scheme(s));
}

std::string serialize_script(const MoveScript& script) {
    std::ostringstream out;
    out << "mmsscript 1\n";
    out << "dims " << script.dims.n << ' ' << script.dims.m << ' ' << script.dims.p << '\n';
    for (const Move& mv : script.moves) {
        std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, FlipMove>) {
                    out << "flip " << to_string(m.slot) << ' ' << m.i << ' ' << m.j << '\n';
                } else if constexpr (std::is_same_v<T, PairwiseReduceMove>) {
                    out << "reduce " << m.i << ' ' << m.j << '\n';
                } else if constexpr (std::is_same_v<T, GeneralReduceMove>) {
                    out << "greduce " << to_string(m.slot) << ' ' << m.group.size();
                    for (int g : m.group) out << ' ' << g;
                    out << '\n';
                } else if constexpr (std::is_same_v<T, PlusMove>) {
                    out << "plus " << to_string(m.slot) << ' ' << m.i << ' ' << m.j << '\n';
                } else {
                    out << "split " << to_string(m.slot) << ' ' << m.idx << ' '
                        << m.donor.to_string() << '\n';
                }
            },
            mv);
    }
    return out.str();
}

MoveScript parse_script(const std::string& text) {
    const std::vector<std::string> lines = split_lines(text);
    if (lines.empty() || lines[0] != "mmsscript 1")
        throw ParseError(1, "malformed header, expected 'mmsscript 1'");
    if (lines.size() < 2) throw ParseError(2, "missing 'dims' line");

    MoveScript script;
    {
        std::istringstream ls(lines[1]);
        std::string tag;
        ls >> tag >> script.dims.n >> script.dims.m >> script.dims.p;
        if (tag != "dims" || ls.fail())
            throw ParseError(2, "malformed dims line, expected 'dims <n> <m> <p>'");
        try {
            script.dims.validate();
        } catch (const std::exception& e) {
            throw ParseError(2, e.what());
        }
    }

    for (std::size_t li = 2; li < lines.size(); ++li) {
        const int line_no = static_cast<int>(li + 1);
        if (lines[li].empty()) continue;
        std::istringstream ls(lines[li]);
        std::string kind;
        ls >> kind;
        if (kind == "flip" || kind == "plus") {
            std::string slot_name;
            int i = -1, j = -1;
            ls >> slot_name >> i >> j;
            if (ls.fail()) throw ParseError(line_no, "malformed " + kind + " move");
            const Slot slot = parse_slot(slot_name, line_no);
            if (kind == "flip")
                script.moves.emplace_back(FlipMove{slot, i, j});
            else
                script.moves.emplace_back(PlusMove{i, j, slot});
        } else if (kind == "reduce") {
            int i = -1, j = -1;
            ls >> i >> j;
            if (ls.fail()) throw ParseError(line_no, "malformed reduce move");
            script.moves.emplace_back(PairwiseReduceMove{i, j});
        } else if (kind == "greduce") {
            std::string slot_name;
            std::size_t count = 0;
            ls >> slot_name >> count;
            if (ls.fail()) throw ParseError(line_no, "malformed greduce move");
            GeneralReduceMove m{parse_slot(slot_name, line_no), {}};
            m.group.resize(count);
            for (std::size_t q = 0; q < count; ++q) ls >> m.group[q];
            if (ls.fail()) throw ParseError(line_no, "greduce group is truncated");
            script.moves.emplace_back(std::move(m));
        } else if (kind == "split") {
            std::string slot_name, bits;
            int idx = -1;
            ls >> slot_name >> idx >> bits;
            if (ls.fail()) throw ParseError(line_no, "malformed split move");
            const Slot slot = parse_slot(slot_name, line_no);
            const int expected_len = slot == Slot::Alpha   ? script.dims.nm()
                                     : slot == Slot::Beta ? script.dims.mp()
                                                          : script.dims.pn();
            script.moves.emplace_back(
                SplitMove{idx, slot, parse_component(bits, expected_len, line_no, "donor")});
        } else {
            throw ParseError(line_no, "unknown move '" + kind + "'");
        }
    }
    return script;
}

MoveScript read_script_file(const std::string& path) { return parse_script(read_text_file(path)); }

void write_script_file(const MoveScript& script, const std::string& path) {
    write_text_file_atomic(path, serialize_script(script));
}

std::string trace_csv(const SearchStats& stats) {
    std::ostringstream out;
    out << "iteration,current_rank,best_rank\n";
    for (const TraceRow& row : stats.trace)
        out << row.iteration << ',' << row.current_rank << ',' << row.best_rank << '\n';
    return out.str();
}

void write_trace_file(const SearchStats& stats, const std::string& path) {
    write_text_file_atomic(path, trace_csv(stats));
}

std::string manifest_text(const RunManifest& m) {
    std::ostringstream out;
    out << "mmsmanifest 1\n";
    out << "artifact_version " << kArtifactVersion << '\n';
    out << "rng_algorithm " << kRngAlgorithm << '\n';
    const SearchParams& p = m.params;
    out << "dims " << p.dims.n << 'x' << p.dims.m << 'x' << p.dims.p << '\n';
    out << "seed " << p.seed << '\n';
    out << "iterations_per_pass " << p.iterations_per_pass() << '\n';
    out << "restarts " << p.restarts << '\n';
    out << "plus_flag " << p.plus_flag << '\n';
    out << "plus_enabled " << (p.plus_enabled ? 1 : 0) << '\n';
    out << "plus_in_constrained_stages " << (p.plus_in_constrained_stages ? 1 : 0) << '\n';
    out << "gr_period " << p.gr_period << '\n';
    out << "trace_stride " << p.trace_stride << '\n';
    out << "checkpoint_every " << p.checkpoint_every << '\n';
    out << "schedule " << m.schedule_origin << '\n';
    out << "stages " << p.schedule.size() << '\n';
    for (const ScheduleStage& st : p.schedule)
        out << "stage " << st.box.n1 << ' ' << st.box.m1 << ' ' << st.box.p1 << ' '
            << st.iterations << '\n';
    out << "init " << m.init_origin << '\n';
    out << "started " << m.started_at << '\n';
    out << "finished " << m.finished_at << '\n';
    out << "best_rank " << m.best_rank << '\n';
    out << "output " << m.output_path << '\n';
    return out.str();
}

void write_manifest_file(const RunManifest& m, const std::string& path) {
    write_text_file_atomic(path, manifest_text(m));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open file for writing: " + tmp);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("failed writing file: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("failed to move " + tmp + " into place");
    }
}

}  // namespace mms
