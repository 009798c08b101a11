#pragma once

// Sensor serial packet format:
//
//   [0xAA][0xAA][PLENGTH][payload: PLENGTH bytes][checksum]
//
// The payload is a run of DataRows, each one
//
//   [0x55]*excode_level [CODE] [LENGTH if CODE >= 0x80] [VALUE...]
//
// and the checksum is the one's complement of the low byte of the payload sum.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecgm::codec {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::uint8_t kSync = 0xAA;
inline constexpr std::uint8_t kExcode = 0x55;
inline constexpr std::size_t kMaxPayload = 169;
inline constexpr std::uint8_t kFirstMultiByteCode = 0x80;

namespace code {
inline constexpr std::uint8_t kPoorSignal = 0x02;
inline constexpr std::uint8_t kHeartRate = 0x03;
inline constexpr std::uint8_t kTemperature = 0x04;  // centi-degC, signed BE
inline constexpr std::uint8_t kSpo2 = 0x05;
inline constexpr std::uint8_t kMotionFlag = 0x06;
inline constexpr std::uint8_t kRawEcg = 0x80;  // signed BE ADC code
}  // namespace code

/// Implicit value width of a single-byte code (< 0x80), if the code is known.
std::optional<std::size_t> implicit_length(std::uint8_t code) noexcept;

/// Declared value width of a known code; nullopt for opaque codes >= 0x80.
std::optional<std::size_t> declared_length(std::uint8_t code) noexcept;

/// Human-readable name ("RAW_ECG", ...) or hex for unknown codes.
std::string code_name(std::uint8_t code);
std::optional<std::uint8_t> code_from_name(const std::string& name);

struct DataRow {
  unsigned excode_level = 0;
  std::uint8_t code = 0;
  Bytes value;

  static DataRow poor_signal(std::uint8_t v);
  static DataRow heart_rate(std::uint8_t bpm);
  static DataRow temperature_centi(std::int16_t centi_c);
  static DataRow spo2(std::uint8_t percent);
  static DataRow motion(bool moving);
  static DataRow raw_ecg(std::int16_t adc_code);

  /// Value interpreted as unsigned (1 byte) or signed big-endian (2 bytes).
  std::int32_t as_int() const;

  /// Bytes this row occupies on the wire.
  std::size_t wire_size() const noexcept;

  bool operator==(const DataRow&) const = default;
};

struct Packet {
  std::vector<DataRow> rows;

  bool operator==(const Packet&) const = default;
};

using ChecksumFn = std::function<std::uint8_t(ByteView)>;

/// One's complement of the low byte of the payload's byte sum.
std::uint8_t compute_checksum(ByteView payload);

Bytes serialize_payload(const Packet& packet);
Bytes encode_packet(const Packet& packet);
std::vector<DataRow> parse_payload(ByteView payload);

enum class EventKind : std::uint8_t {
  PacketDecoded,
  ChecksumError,
  LengthError,
  RowFormatError,
};

const char* to_string(EventKind kind) noexcept;

struct DecodeEvent {
  EventKind kind = EventKind::PacketDecoded;
  /// Stream offset of the first sync byte of the frame attempt.
  std::uint64_t byte_offset = 0;
  Packet packet;  // populated for PacketDecoded only
};

struct DecoderStats {
  std::uint64_t packets_ok = 0;
  std::uint64_t checksum_errors = 0;
  std::uint64_t length_errors = 0;
  std::uint64_t row_errors = 0;
  std::uint64_t resyncs = 0;
  std::uint64_t checksum_exits = 0;
  std::uint64_t bytes_in = 0;
};

/// Incremental parser for the sync/length/payload/checksum framing.
///
/// Any failed attempt rewinds to the byte after that attempt's first sync
/// byte, so a header hiding inside a broken frame is still found. Not
/// thread-safe; a decoder has one owner at a time.
class StreamDecoder {
 public:
  enum class State : std::uint8_t { Sync1, Sync2, PLength, Payload, Checksum };

  StreamDecoder();
  explicit StreamDecoder(ChecksumFn checksum);

  std::vector<DecodeEvent> feed(ByteView bytes);

  State state() const noexcept { return state_; }
  const DecoderStats& stats() const noexcept { return stats_; }
  std::size_t buffered_payload() const noexcept { return payload_.size(); }
  std::size_t expected_length() const noexcept { return expected_; }

 private:
  struct Pending;
  void step(std::uint8_t byte, std::uint64_t offset, Pending& pending,
            std::vector<DecodeEvent>& out);
  void rewind(Pending& pending);

  ChecksumFn checksum_;
  State state_ = State::Sync1;
  Bytes payload_;
  std::size_t expected_ = 0;
  // Bytes of the current attempt, starting at its first sync byte.
  Bytes attempt_;
  std::uint64_t attempt_offset_ = 0;
  std::uint64_t next_offset_ = 0;
  DecoderStats stats_;
};

/// Free-function form of `decoder.feed(bytes)`.
std::vector<DecodeEvent> stream_feed(StreamDecoder& decoder, ByteView bytes);

}  // namespace ecgm::codec
