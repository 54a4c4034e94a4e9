#pragma once

#include <span>
#include <string>
#include <vector>

#include "driftbench/constraint.hpp"

namespace driftbench {

/// English sentence for one constraint, e.g. "Karen must sit at position 3."
std::string render_constraint(const Constraint& c);

/// The `Domain:` / `Entities:` / `Context:` lines that open a problem.
std::string setup_block(const DomainSchema& s);

/// User message for a turn: setup framing on turn 1, then one sentence per
/// constraint, one per line.
std::string render_utterance(std::span<const Constraint> fresh, const DomainSchema& s, int turn);

/// Rule-based inverse of render_constraint over every line of `text`;
/// lines that match no template are skipped. Results carry `turn`.
std::vector<Constraint> extract_from_utterance(const std::string& text, int turn);

}  // namespace driftbench
