#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "ecgm/bridge.hpp"
#include "ecgm/codec.hpp"
#include "ecgm/error.hpp"
#include "ecgm/monitor.hpp"
#include "ecgm/pipeline.hpp"
#include "ecgm/power.hpp"
#include "ecgm/signal.hpp"

namespace py = pybind11;
using namespace ecgm;

namespace {

codec::Bytes to_bytes(const py::bytes& b) {
  const std::string s = b;
  return codec::Bytes(s.begin(), s.end());
}

py::bytes from_bytes(const codec::Bytes& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

signal::SampleStream analog(std::vector<double> samples, double fs) {
  return {fs, signal::Domain::Analog, std::move(samples)};
}

py::dict quality_dict(const host::QualityReport& q) {
  py::dict d;
  d["packets_ok"] = q.packets_ok;
  d["checksum_errors"] = q.checksum_errors;
  d["length_errors"] = q.length_errors;
  d["row_errors"] = q.row_errors;
  d["resyncs"] = q.resyncs;
  d["transport_gaps"] = q.transport_gaps;
  d["adc_saturation_count"] = q.adc_saturation_count;
  d["opaque_rows"] = q.opaque_rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ecgm, m) {
  m.doc() = "Native core of the ecgm package";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&] { return py::object(py::exception<Error>(m, "EcgmError", PyExc_RuntimeError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object exc = type(e.what());
      exc.attr("kind") = to_string(e.kind());
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  // codec
  py::class_<codec::DataRow>(m, "DataRow")
      .def(py::init([](std::uint8_t code, const py::bytes& value, unsigned excode_level) {
             return codec::DataRow{excode_level, code, to_bytes(value)};
           }),
           py::arg("code"), py::arg("value"), py::arg("excode_level") = 0)
      .def_readwrite("code", &codec::DataRow::code)
      .def_readwrite("excode_level", &codec::DataRow::excode_level)
      .def_property_readonly("value", [](const codec::DataRow& r) { return from_bytes(r.value); })
      .def("as_int", &codec::DataRow::as_int)
      .def_static("raw_ecg", &codec::DataRow::raw_ecg)
      .def_static("heart_rate", &codec::DataRow::heart_rate)
      .def_static("poor_signal", &codec::DataRow::poor_signal)
      .def_static("temperature_centi", &codec::DataRow::temperature_centi)
      .def_static("spo2", &codec::DataRow::spo2)
      .def_static("motion", &codec::DataRow::motion)
      .def("__eq__", [](const codec::DataRow& a, const codec::DataRow& b) { return a == b; })
      .def("__repr__", [](const codec::DataRow& r) {
        return "DataRow(" + codec::code_name(r.code) + ", " + std::to_string(r.value.size()) + " bytes)";
      });

  m.def("compute_checksum", [](const py::bytes& payload) { return codec::compute_checksum(to_bytes(payload)); });
  m.def("encode_packet", [](const std::vector<codec::DataRow>& rows) {
    return from_bytes(codec::encode_packet(codec::Packet{rows}));
  });
  m.def("code_name", &codec::code_name);

  py::class_<codec::StreamDecoder>(m, "StreamDecoder")
      .def(py::init<>())
      .def("feed",
           [](codec::StreamDecoder& d, const py::bytes& data) {
             py::list out;
             for (const auto& e : d.feed(to_bytes(data))) {
               py::dict ev;
               ev["kind"] = codec::to_string(e.kind);
               ev["offset"] = e.byte_offset;
               ev["rows"] = e.packet.rows;
               out.append(ev);
             }
             return out;
           })
      .def_property_readonly("stats", [](const codec::StreamDecoder& d) {
        const auto& s = d.stats();
        py::dict out;
        out["packets_ok"] = s.packets_ok;
        out["checksum_errors"] = s.checksum_errors;
        out["length_errors"] = s.length_errors;
        out["row_errors"] = s.row_errors;
        out["resyncs"] = s.resyncs;
        out["bytes_in"] = s.bytes_in;
        return out;
      });

  // signal
  m.def(
      "gen_ecg",
      [](double hr, double duration, double fs) {
        auto e = signal::gen_ecg(hr, fs, duration);
        return py::make_tuple(e.stream.samples, e.r_peaks);
      },
      py::arg("hr_bpm"), py::arg("duration_s"), py::arg("fs") = signal::kDefaultFs);
  m.def(
      "add_noise",
      [](std::vector<double> x, double fs, double powerline_mv, double powerline_hz, double emg_rms_mv,
         std::uint64_t seed) {
        signal::NoiseConfig cfg;
        cfg.powerline = {powerline_hz, powerline_mv};
        cfg.emg.rms_mv = emg_rms_mv;
        cfg.emg.seed = seed;
        return signal::add_noise(analog(std::move(x), fs), cfg).samples;
      },
      py::arg("samples"), py::arg("fs") = signal::kDefaultFs, py::arg("powerline_mv") = 0.0,
      py::arg("powerline_hz") = 50.0, py::arg("emg_rms_mv") = 0.0, py::arg("seed") = 1);
  m.def(
      "afe_pipeline",
      [](std::vector<double> x, double fs, double notch_hz) {
        signal::AfeConfig cfg;
        cfg.notch.f0_hz = notch_hz;
        auto r = signal::afe_pipeline(analog(std::move(x), fs), cfg);
        return py::make_tuple(r.stream.samples, r.diagnostics.adc_saturations);
      },
      py::arg("samples"), py::arg("fs") = signal::kDefaultFs, py::arg("notch_hz") = 50.0);
  m.def(
      "magnitude_response",
      [](const std::string& kind, double freq, double fs, double q, double at_hz) {
        signal::FilterKind k;
        if (kind == "notch") {
          k = signal::FilterKind::Notch;
        } else if (kind == "lowpass") {
          k = signal::FilterKind::Lowpass;
        } else if (kind == "highpass") {
          k = signal::FilterKind::Highpass;
        } else {
          throw Error(ErrorKind::Parameter, "filter kind must be notch, lowpass or highpass");
        }
        return signal::magnitude_response(signal::design_filter(k, freq, fs, q), at_hz, fs);
      },
      py::arg("kind"), py::arg("freq_hz"), py::arg("fs"), py::arg("q"), py::arg("at_hz"));

  // transport
  m.def(
      "segment",
      [](const py::bytes& data, std::size_t mtu) {
        py::list out;
        for (const auto& n : ble::segment(to_bytes(data), mtu)) out.append(py::make_tuple(n.seq, from_bytes(n.payload)));
        return out;
      },
      py::arg("data"), py::arg("mtu") = ble::kDefaultMtu);
  m.def("reassemble", [](const std::vector<std::pair<std::uint32_t, py::bytes>>& notes) {
    std::vector<ble::Notification> v;
    for (const auto& [seq, payload] : notes) v.push_back({seq, to_bytes(payload)});
    return from_bytes(ble::reassemble(v));
  });

  // power
  m.def("rails_check", [] {
    py::list out;
    for (const auto& v : power::validate_rails(power::board_components(), power::board_rails()).verdicts) {
      out.append(py::make_tuple(v.rail_voltage, v.component, v.pass));
    }
    return out;
  });
  m.def(
      "battery_runtime",
      [](const std::vector<std::pair<std::string, double>>& duty, double capacity_mah) {
        power::BatteryModel b;
        b.capacity_mah = capacity_mah;
        std::vector<power::DutyShare> shares;
        for (const auto& [state, frac] : duty) shares.push_back({state, frac});
        return power::battery_runtime(b, power::CurrentProfile{}, shares);
      },
      py::arg("duty"), py::arg("capacity_mah") = 120.0);
  m.def("charge_compliance", [](double kohm) {
    const auto c = power::charge_compliance(power::BatteryModel{}, kohm);
    return py::make_tuple(c.max_current_ma, c.resistor_ok, c.implied_current_ma);
  });

  // host
  m.def(
      "detect_qrs",
      [](std::vector<double> x, double fs) { return host::detect_qrs(analog(std::move(x), fs), fs); },
      py::arg("samples"), py::arg("fs") = signal::kDefaultFs);
  m.def("hr_from_peaks", [](const std::vector<std::size_t>& peaks, double fs) { return host::hr_from_peaks(peaks, fs); },
        py::arg("peaks"), py::arg("fs") = signal::kDefaultFs);
  m.def("decode_session", [](const py::bytes& data, double fs) {
    host::Session s(fs);
    s.ingest(to_bytes(data));
    py::list vitals;
    for (const auto& v : s.vitals()) vitals.append(py::make_tuple(v.time_s, host::to_string(v.kind), v.value));
    return py::make_tuple(s.ecg().samples, vitals, quality_dict(s.quality()));
  }, py::arg("data"), py::arg("fs") = signal::kDefaultFs);

  // end to end; the config travels as JSON text so it shares the CLI's keys
  m.def("_run_e2e", [](const std::string& config_json) {
    pipeline::RunConfig cfg;
    pipeline::apply_json(cfg, nlohmann::json::parse(config_json));
    const auto r = pipeline::run_e2e(cfg);
    auto j = nlohmann::json::parse(host::export_session(r.session, host::ExportKind::SummaryJson, cfg.qrs));
    j["frames_generated"] = r.frames_generated;
    j["frames_emitted"] = r.frames_emitted;
    j["frames_dropped"] = r.frames_dropped;
    j["notifications"] = r.notifications.size();
    j["energy_mah"] = r.energy_mah;
    return j.dump();
  });
  m.def("_default_config", [] { return pipeline::to_json(pipeline::RunConfig{}).dump(); });
}
