#pragma once

#include <iosfwd>
#include <string>

#include "ramcp/model.hpp"

namespace ramcp {

/**
 * Line-oriented model format ('#' starts a comment):
 *
 *   discount: <real>
 *   states: <name>+
 *   actions: <name>+
 *   observations: <name>+
 *   start: <real>+
 *   T: <action> : <s> : <s'> <prob>
 *   O: <s> : <o> <prob>
 *   R: <s> : <action> <reward>
 *
 * '*' in an action or state position of T, O and R means "every". Unlisted
 * entries are zero. Parsing does not validate; load_model() does.
 */
Pomdp parse_model(std::istream& in);
Pomdp parse_model_string(const std::string& text);

/// Parses and validates; throws ModelError on any problem.
Pomdp load_model(const std::string& path);

/// Writes every nonzero entry with round-trip precision.
void write_model(std::ostream& out, const Pomdp& model);
std::string model_to_string(const Pomdp& model);

}  // namespace ramcp
