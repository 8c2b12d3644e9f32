#include "metasim/async/pipeline.hpp"

#include <sstream>

#include "metasim/error.hpp"
#include "metasim/hash.hpp"

namespace metasim::async {

Pipeline compose_pipeline(std::span<const StageDescriptor> stages, Protocol protocol,
                          const sim::DelayModel& wire, Duration setup_margin) {
  if (stages.empty()) throw Error(ErrorCode::InterfaceMismatch, "pipeline needs at least one stage");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].protocol != protocol) {
      throw Error(ErrorCode::InterfaceMismatch,
                  "stage " + std::to_string(i) + " protocol differs from the pipeline's");
    }
    if (i > 0 && stages[i].width != stages[i - 1].width) {
      throw Error(ErrorCode::InterfaceMismatch,
                  "stage " + std::to_string(i - 1) + " width " + std::to_string(stages[i - 1].width) +
                      " feeds stage " + std::to_string(i) + " width " +
                      std::to_string(stages[i].width));
    }
  }

  Pipeline p;
  ChannelConfig in;
  in.protocol = protocol;
  in.width = stages.front().width;
  in.data_delay = wire;
  in.setup_margin = setup_margin;
  p.channels_.push_back(p.net_.add_channel(in));
  for (const auto& s : stages) {
    ChannelConfig out;
    out.protocol = protocol;
    out.width = s.width;
    out.data_delay = s.function_delay;
    out.matched_delay = s.matched_delay;
    out.setup_margin = setup_margin;
    out.allow_under_match = s.allow_under_match;
    p.channels_.push_back(p.net_.add_channel(out));
  }
  p.stages_.assign(stages.size(), std::nullopt);
  return p;
}

void Pipeline::start(StepContext& ctx) {
  pump_source(ctx);
  drain(ctx);
}

void Pipeline::pump_source(StepContext& ctx) {
  if (!source_.empty() && !net_.busy(channels_.front())) {
    net_.send(channels_.front(), source_.front(), ctx);
    source_.pop_front();
  }
}

void Pipeline::handle(const sim::Event& ev, StepContext& ctx) {
  net_.on_event(ev, ctx);
  drain(ctx);
}

void Pipeline::drain(StepContext& ctx) {
  // Notifications may cascade (freeing a stage can latch a waiting request),
  // so walk the growing list by index.
  auto& notes = *ctx.notes;
  for (std::size_t i = 0; i < notes.size(); ++i) {
    const Notification n = notes[i];
    std::size_t idx = 0;
    while (channels_[idx] != n.channel) ++idx;
    if (n.kind == Notification::Kind::Latched) {
      if (idx == stages_.size()) {
        delivered_.push_back(n.word);
      } else {
        stages_[idx] = n.word;
        net_.set_rx_ready(channels_[idx], false, ctx);
        net_.send(channels_[idx + 1], n.word, ctx);
      }
    } else {  // SendDone on channel idx: its sender is stage idx-1 or the source
      if (idx == 0) {
        pump_source(ctx);
      } else {
        stages_[idx - 1].reset();
        net_.set_rx_ready(channels_[idx - 1], true, ctx);
      }
    }
  }
  notes.clear();
}

bool Pipeline::drained() const {
  for (const auto& s : stages_) {
    if (s) return false;
  }
  return source_.empty() && net_.idle();
}

std::uint64_t Pipeline::fingerprint() const {
  Hasher h;
  h.add(net_.fingerprint());
  for (const auto& s : stages_) h.add(s ? *s + 1 : 0);
  h.add(source_.size());
  for (Word w : delivered_) h.add(w);
  return h.value();
}

std::string Pipeline::outcome() const {
  std::ostringstream os;
  os << "delivered:";
  for (Word w : delivered_) os << ' ' << w;
  return os.str();
}

}  // namespace metasim::async
