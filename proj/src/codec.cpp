#include "ecgm/codec.hpp"

#include <deque>
#include <utility>

#include "ecgm/error.hpp"

namespace ecgm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Length: return "length error";
    case ErrorKind::RowFormat: return "row format error";
    case ErrorKind::ProtocolState: return "protocol-state error";
    case ErrorKind::TransportGap: return "transport-gap error";
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::InsufficientData: return "insufficient-data error";
    case ErrorKind::UndefinedRuntime: return "undefined-runtime error";
    case ErrorKind::Export: return "export error";
    case ErrorKind::Parse: return "parse error";
  }
  return "error";
}

}  // namespace ecgm

namespace ecgm::codec {

namespace {

struct CodeInfo {
  std::uint8_t code;
  const char* name;
  std::size_t width;
};

constexpr CodeInfo kCodes[] = {
    {code::kPoorSignal, "POOR_SIGNAL", 1},
    {code::kHeartRate, "HEART_RATE", 1},
    {code::kTemperature, "TEMPERATURE", 2},
    {code::kSpo2, "SPO2", 1},
    {code::kMotionFlag, "MOTION_FLAG", 1},
    {code::kRawEcg, "RAW_ECG", 2},
};

const CodeInfo* find_code(std::uint8_t c) noexcept {
  for (const auto& info : kCodes) {
    if (info.code == c) return &info;
  }
  return nullptr;
}

Bytes be16(std::int16_t v) {
  const auto u = static_cast<std::uint16_t>(v);
  return {static_cast<std::uint8_t>(u >> 8), static_cast<std::uint8_t>(u & 0xFF)};
}

void check_row(const DataRow& row) {
  if (row.code == kExcode) {
    throw Error(ErrorKind::RowFormat, "code 0x55 is reserved for EXCODE");
  }
  if (row.code < kFirstMultiByteCode) {
    const auto width = implicit_length(row.code);
    if (!width) {
      throw Error(ErrorKind::RowFormat,
                  "unknown single-byte code " + code_name(row.code));
    }
    if (row.value.size() != *width) {
      throw Error(ErrorKind::RowFormat,
                  code_name(row.code) + " needs " + std::to_string(*width) +
                      " value byte(s), got " + std::to_string(row.value.size()));
    }
    return;
  }
  if (row.value.size() > 0xFF) {
    throw Error(ErrorKind::RowFormat, "row value longer than 255 bytes");
  }
  if (const auto width = declared_length(row.code); width && row.value.size() != *width) {
    throw Error(ErrorKind::RowFormat,
                code_name(row.code) + " needs " + std::to_string(*width) +
                    " value byte(s), got " + std::to_string(row.value.size()));
  }
}

}  // namespace

std::optional<std::size_t> implicit_length(std::uint8_t c) noexcept {
  if (c >= kFirstMultiByteCode) return std::nullopt;
  if (const auto* info = find_code(c)) return info->width;
  return std::nullopt;
}

std::optional<std::size_t> declared_length(std::uint8_t c) noexcept {
  if (const auto* info = find_code(c)) return info->width;
  return std::nullopt;
}

std::string code_name(std::uint8_t c) {
  if (const auto* info = find_code(c)) return info->name;
  static constexpr char kHex[] = "0123456789ABCDEF";
  return std::string("0x") + kHex[c >> 4] + kHex[c & 0xF];
}

std::optional<std::uint8_t> code_from_name(const std::string& name) {
  for (const auto& info : kCodes) {
    if (name == info.name) return info.code;
  }
  return std::nullopt;
}

DataRow DataRow::poor_signal(std::uint8_t v) { return {0, code::kPoorSignal, {v}}; }
DataRow DataRow::heart_rate(std::uint8_t bpm) { return {0, code::kHeartRate, {bpm}}; }
DataRow DataRow::temperature_centi(std::int16_t centi_c) {
  return {0, code::kTemperature, be16(centi_c)};
}
DataRow DataRow::spo2(std::uint8_t percent) { return {0, code::kSpo2, {percent}}; }
DataRow DataRow::motion(bool moving) {
  return {0, code::kMotionFlag, {static_cast<std::uint8_t>(moving ? 1 : 0)}};
}
DataRow DataRow::raw_ecg(std::int16_t adc_code) { return {0, code::kRawEcg, be16(adc_code)}; }

std::int32_t DataRow::as_int() const {
  if (value.size() == 1) return value[0];
  if (value.size() == 2) {
    return static_cast<std::int16_t>(static_cast<std::uint16_t>(value[0] << 8 | value[1]));
  }
  throw Error(ErrorKind::RowFormat,
              code_name(code) + " value is not a 1- or 2-byte integer");
}

std::size_t DataRow::wire_size() const noexcept {
  return excode_level + 1 + (code >= kFirstMultiByteCode ? 1 : 0) + value.size();
}

std::uint8_t compute_checksum(ByteView payload) {
  if (payload.size() > kMaxPayload) {
    throw Error(ErrorKind::Length, "payload of " + std::to_string(payload.size()) +
                                       " bytes exceeds " + std::to_string(kMaxPayload));
  }
  unsigned sum = 0;
  for (auto b : payload) sum += b;
  return static_cast<std::uint8_t>(~sum & 0xFF);
}

Bytes serialize_payload(const Packet& packet) {
  Bytes out;
  for (const auto& row : packet.rows) {
    check_row(row);
    out.insert(out.end(), row.excode_level, kExcode);
    out.push_back(row.code);
    if (row.code >= kFirstMultiByteCode) {
      out.push_back(static_cast<std::uint8_t>(row.value.size()));
    }
    out.insert(out.end(), row.value.begin(), row.value.end());
  }
  if (out.empty() || out.size() > kMaxPayload) {
    throw Error(ErrorKind::Length, "serialized payload is " + std::to_string(out.size()) +
                                       " bytes; must be in [1, 169]");
  }
  return out;
}

Bytes encode_packet(const Packet& packet) {
  const Bytes payload = serialize_payload(packet);
  Bytes frame;
  frame.reserve(payload.size() + 4);
  frame.push_back(kSync);
  frame.push_back(kSync);
  frame.push_back(static_cast<std::uint8_t>(payload.size()));
  frame.insert(frame.end(), payload.begin(), payload.end());
  frame.push_back(compute_checksum(payload));
  return frame;
}

std::vector<DataRow> parse_payload(ByteView payload) {
  if (payload.empty()) {
    throw Error(ErrorKind::Length, "empty payload");
  }
  std::vector<DataRow> rows;
  std::size_t i = 0;
  while (i < payload.size()) {
    DataRow row;
    while (i < payload.size() && payload[i] == kExcode) {
      ++row.excode_level;
      ++i;
    }
    if (i == payload.size()) {
      throw Error(ErrorKind::RowFormat, "payload ends inside an EXCODE prefix");
    }
    row.code = payload[i++];
    std::size_t width = 0;
    if (row.code < kFirstMultiByteCode) {
      const auto implicit = implicit_length(row.code);
      if (!implicit) {
        throw Error(ErrorKind::RowFormat,
                    "unknown single-byte code " + code_name(row.code) + " at payload offset " +
                        std::to_string(i - 1));
      }
      width = *implicit;
    } else {
      if (i == payload.size()) {
        throw Error(ErrorKind::RowFormat, "payload ends before LENGTH of " + code_name(row.code));
      }
      width = payload[i++];
      if (const auto declared = declared_length(row.code); declared && width != *declared) {
        throw Error(ErrorKind::RowFormat,
                    code_name(row.code) + " declares LENGTH " + std::to_string(width));
      }
    }
    if (width > payload.size() - i) {
      throw Error(ErrorKind::RowFormat,
                  code_name(row.code) + " needs " + std::to_string(width) + " byte(s), " +
                      std::to_string(payload.size() - i) + " remain");
    }
    row.value.assign(payload.begin() + static_cast<std::ptrdiff_t>(i),
                     payload.begin() + static_cast<std::ptrdiff_t>(i + width));
    i += width;
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::PacketDecoded: return "PacketDecoded";
    case EventKind::ChecksumError: return "ChecksumError";
    case EventKind::LengthError: return "LengthError";
    case EventKind::RowFormatError: return "RowFormatError";
  }
  return "?";
}

// Work queue for one feed() call. Always a contiguous slice of the stream:
// rewound attempt bytes are pushed back in front of the unread input.
struct StreamDecoder::Pending {
  std::deque<std::uint8_t> bytes;
  std::uint64_t front_offset = 0;
};

StreamDecoder::StreamDecoder() : StreamDecoder(ChecksumFn(compute_checksum)) {}

StreamDecoder::StreamDecoder(ChecksumFn checksum) : checksum_(std::move(checksum)) {
  payload_.reserve(kMaxPayload);
  attempt_.reserve(kMaxPayload + 4);
}

std::vector<DecodeEvent> StreamDecoder::feed(ByteView bytes) {
  std::vector<DecodeEvent> out;
  stats_.bytes_in += bytes.size();
  Pending pending{{bytes.begin(), bytes.end()}, next_offset_};
  next_offset_ += bytes.size();
  while (!pending.bytes.empty()) {
    const std::uint8_t b = pending.bytes.front();
    const std::uint64_t offset = pending.front_offset;
    pending.bytes.pop_front();
    ++pending.front_offset;
    step(b, offset, pending, out);
  }
  return out;
}

void StreamDecoder::rewind(Pending& pending) {
  ++stats_.resyncs;
  // attempt_[0] is the sync byte we abandon; everything after it is rescanned.
  for (std::size_t k = attempt_.size(); k-- > 1;) {
    pending.bytes.push_front(attempt_[k]);
  }
  pending.front_offset = attempt_offset_ + 1;
  attempt_.clear();
  payload_.clear();
  expected_ = 0;
  state_ = State::Sync1;
}

void StreamDecoder::step(std::uint8_t b, std::uint64_t offset, Pending& pending,
                         std::vector<DecodeEvent>& out) {
  switch (state_) {
    case State::Sync1:
      if (b == kSync) {
        attempt_.assign(1, b);
        attempt_offset_ = offset;
        state_ = State::Sync2;
      }
      return;

    case State::Sync2:
      attempt_.push_back(b);
      if (b == kSync) {
        state_ = State::PLength;
      } else {
        rewind(pending);
      }
      return;

    case State::PLength:
      if (b == kSync) {
        // A third sync byte: the header may start one byte later.
        attempt_.erase(attempt_.begin());
        attempt_.push_back(b);
        ++attempt_offset_;
        return;
      }
      attempt_.push_back(b);
      if (b == 0 || b > kMaxPayload) {
        ++stats_.length_errors;
        out.push_back({EventKind::LengthError, attempt_offset_, {}});
        rewind(pending);
        return;
      }
      expected_ = b;
      state_ = State::Payload;
      return;

    case State::Payload:
      attempt_.push_back(b);
      payload_.push_back(b);
      if (payload_.size() == expected_) state_ = State::Checksum;
      return;

    case State::Checksum: {
      attempt_.push_back(b);
      ++stats_.checksum_exits;
      if (checksum_(payload_) != b) {
        ++stats_.checksum_errors;
        out.push_back({EventKind::ChecksumError, attempt_offset_, {}});
        rewind(pending);
        return;
      }
      DecodeEvent ev{EventKind::PacketDecoded, attempt_offset_, {}};
      try {
        ev.packet.rows = parse_payload(payload_);
      } catch (const Error&) {
        ++stats_.row_errors;
        out.push_back({EventKind::RowFormatError, attempt_offset_, {}});
        rewind(pending);
        return;
      }
      ++stats_.packets_ok;
      out.push_back(std::move(ev));
      attempt_.clear();
      payload_.clear();
      expected_ = 0;
      state_ = State::Sync1;
      return;
    }
  }
}

std::vector<DecodeEvent> stream_feed(StreamDecoder& decoder, ByteView bytes) {
  return decoder.feed(bytes);
}

}  // namespace ecgm::codec
