#pragma once

#include <stdexcept>
#include <string>

#include "mms/scheme.hpp"
#include "mms/search.hpp"
#include "mms/witness.hpp"

namespace mms {

/// Parse failure carrying the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

/// Scheme text format, line oriented and bit exact:
///   mms 1
///   dims <n> <m> <p>
///   rank <r>
/// followed by r lines `<alpha> <beta> <gamma>`, each component a 0/1 string
/// of exact length n*m, m*p, p*n with string position q holding bit q.
std::string serialize_scheme(const Scheme& s);

/// Parses and validates: exact lengths, no zero components, and a full
/// verify() of the tensor sum. Throws ParseError otherwise.
Scheme parse_scheme(const std::string& text);

Scheme read_scheme_file(const std::string& path);
void write_scheme_file(const Scheme& s, const std::string& path);

/// Move script text format: header `mmsscript 1`, then `dims <n> <m> <p>`,
/// then one move per line:
///   flip <slot> <i> <j>
///   reduce <i> <j>
///   greduce <slot> <count> <i...>
///   plus <slot> <i> <j>
///   split <slot> <idx> <donor-bits>
std::string serialize_script(const MoveScript& script);
MoveScript parse_script(const std::string& text);

MoveScript read_script_file(const std::string& path);
void write_script_file(const MoveScript& script, const std::string& path);

/// Trace CSV with fixed header `iteration,current_rank,best_rank`.
std::string trace_csv(const SearchStats& stats);
void write_trace_file(const SearchStats& stats, const std::string& path);

/// Key-value run manifest; together with the seed it pins everything needed
/// to reproduce a search run bit for bit.
struct RunManifest {
    SearchParams params;
    std::string schedule_origin;  // "auto", "none" or a file path
    std::string init_origin;      // "standard" or a file path
    std::string started_at;
    std::string finished_at;
    int best_rank = 0;
    std::string output_path;
};

std::string manifest_text(const RunManifest& m);
void write_manifest_file(const RunManifest& m, const std::string& path);

/// Whole-file helpers; writes go to a temporary file first and are renamed
/// into place.
std::string read_text_file(const std::string& path);
void write_text_file_atomic(const std::string& path, const std::string& content);

}  // namespace mms
