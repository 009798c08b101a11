#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ecgm/bridge.hpp"
#include "ecgm/codec.hpp"
#include "ecgm/signal.hpp"

namespace ecgm::io {

/// Two hex digits per byte; whitespace between bytes is optional.
codec::Bytes parse_hex(std::string_view text);
std::string to_hex(codec::ByteView bytes, std::string_view sep = " ");

codec::Bytes read_file(const std::string& path);
std::string read_text(const std::string& path);
void write_file(const std::string& path, std::string_view content);
void write_file(const std::string& path, codec::ByteView content);

/// Raw wire bytes, or a whitespace-separated hexdump when `hex` is set.
codec::Bytes read_capture(const std::string& path, bool hex);

/// Shortest decimal form that round-trips.
std::string format_number(double v);
/// Fixed six decimals, for time columns.
std::string format_time(double seconds);

/// CSV with header `index,time_s,value`.
std::string stream_to_csv(const signal::SampleStream& stream);
/// Reads `index,time_s,value`; fs comes from the time column when it has
/// at least two rows, otherwise from `fallback_fs`.
signal::SampleStream stream_from_csv(std::string_view text, signal::Domain domain,
                                     double fallback_fs = signal::kDefaultFs);

/// CSV with header `seq,len,hex_payload`.
std::string notifications_to_csv(const std::vector<ble::Notification>& notes);
std::vector<ble::Notification> notifications_from_csv(std::string_view text);

}  // namespace ecgm::io
