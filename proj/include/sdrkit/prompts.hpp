#pragma once

#include <string>
#include <vector>

#include "sdrkit/inventory.hpp"

namespace sdrkit {

const std::string& instruction_block(Condition c);

/// Persona prefix, blank line, instruction block, blank line, 7-point
/// accuracy anchors, "++++", "Statement: <text>", "++++" (no trailing newline).
std::string render_likert_prompt(const std::string& persona_desc, Condition c,
                                 const std::string& statement);

/// Same frame with bipolar anchors and the payload "LEFT: <l>  ||  RIGHT: <r>".
/// The anchors always refer to the displayed slots.
std::string render_gfc_prompt(const std::string& persona_desc, Condition c,
                              const std::string& left_text, const std::string& right_text);

/// Desirability rating request for one block of statements on the 1..9 scale.
std::string render_rating_prompt(const std::vector<std::string>& statements);

}  // namespace sdrkit
