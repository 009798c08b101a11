#include "ecgm/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ecgm/error.hpp"

namespace ecgm::io {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
  field = trim(field);
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": cannot parse '" +
                                      std::string(field) + "'");
  }
  return value;
}

template <typename Fn>
void for_each_data_line(std::string_view text, std::string_view header, Fn&& fn) {
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != header) {
        throw Error(ErrorKind::Parse, "expected header '" + std::string(header) + "', got '" +
                                          std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    fn(line, line_no);
  }
}

}  // namespace

codec::Bytes parse_hex(std::string_view text) {
  codec::Bytes out;
  int high = -1;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (high >= 0) throw Error(ErrorKind::Parse, "odd number of hex digits in a byte");
      continue;
    }
    const int v = hex_value(c);
    if (v < 0) throw Error(ErrorKind::Parse, std::string("invalid hex digit '") + c + "'");
    if (high < 0) {
      high = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(high << 4 | v));
      high = -1;
    }
  }
  if (high >= 0) throw Error(ErrorKind::Parse, "odd number of hex digits");
  return out;
}

std::string to_hex(codec::ByteView bytes, std::string_view sep) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size() * (2 + sep.size()));
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i) out += sep;
    out += kDigits[bytes[i] >> 4];
    out += kDigits[bytes[i] & 0xF];
  }
  return out;
}

codec::Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Configuration, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Export, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Export, "write to '" + path + "' failed");
}

void write_file(const std::string& path, codec::ByteView content) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(content.data()), content.size()));
}

codec::Bytes read_capture(const std::string& path, bool hex) {
  if (!hex) return read_file(path);
  return parse_hex(read_text(path));
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

std::string format_time(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", seconds);
  return buf;
}

std::string stream_to_csv(const signal::SampleStream& stream) {
  std::string out = "index,time_s,value\n";
  for (std::size_t i = 0; i < stream.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_time(static_cast<double>(i) / stream.fs);
    out += ',';
    out += format_number(stream.samples[i]);
    out += '\n';
  }
  return out;
}

signal::SampleStream stream_from_csv(std::string_view text, signal::Domain domain,
                                     double fallback_fs) {
  signal::SampleStream out{fallback_fs, domain, {}};
  std::vector<double> times;
  for_each_data_line(text, "index,time_s,value", [&](std::string_view line, std::size_t no) {
    const auto f = split(line, ',');
    if (f.size() != 3) throw Error(ErrorKind::Parse, "line " + std::to_string(no) + ": need 3 fields");
    times.push_back(parse_field<double>(f[1], no));
    out.samples.push_back(parse_field<double>(f[2], no));
  });
  if (times.size() >= 2) {
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw Error(ErrorKind::Parse, "time column must increase");
    out.fs = 1.0 / dt;
  }
  return out;
}

std::string notifications_to_csv(const std::vector<ble::Notification>& notes) {
  std::string out = "seq,len,hex_payload\n";
  for (const auto& n : notes) {
    out += std::to_string(n.seq) + ',' + std::to_string(n.payload.size()) + ',' +
           to_hex(n.payload, "") + '\n';
  }
  return out;
}

std::vector<ble::Notification> notifications_from_csv(std::string_view text) {
  std::vector<ble::Notification> out;
  for_each_data_line(text, "seq,len,hex_payload", [&](std::string_view line, std::size_t no) {
    const auto f = split(line, ',');
    if (f.size() != 3) throw Error(ErrorKind::Parse, "line " + std::to_string(no) + ": need 3 fields");
    ble::Notification n;
    n.seq = parse_field<std::uint32_t>(f[0], no);
    const auto len = parse_field<std::size_t>(f[1], no);
    n.payload = parse_hex(trim(f[2]));
    if (n.payload.size() != len) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(no) + ": len " + std::to_string(len) +
                                        " does not match payload of " +
                                        std::to_string(n.payload.size()) + " bytes");
    }
    out.push_back(std::move(n));
  });
  return out;
}

}  // namespace ecgm::io
