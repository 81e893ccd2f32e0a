#pragma once

#include "qkdnet/decoy.hpp"
#include "qkdnet/simulator.hpp"

#include <string>

namespace qkdnet {

/// Machine-readable record stream: one JSON object per session, then one
/// network summary object. Field names are frozen; see the README schema.
std::string to_jsonl(const NetworkReport& report);

/// Inverse of to_jsonl. Round-trips losslessly:
/// to_jsonl(network_report_from_jsonl(x)) == x.
NetworkReport network_report_from_jsonl(const std::string& text);

std::string to_jsonl(const KeyRateReport& report);
KeyRateReport key_rate_report_from_jsonl(const std::string& text);

/// Human-readable tables for standard output.
std::string human_table(const NetworkReport& report);
std::string human_table(const KeyRateReport& report);

} // namespace qkdnet
