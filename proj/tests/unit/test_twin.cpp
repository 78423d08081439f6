#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "laserguide/demo.hpp"
#include "laserguide/error.hpp"
#include "laserguide/plan.hpp"
#include "laserguide/twin/emulator.hpp"
#include "laserguide/twin/program.hpp"
#include "laserguide/twin/protocol.hpp"
#include "laserguide/twin/transport.hpp"

using namespace laserguide;
using namespace laserguide::twin;
using geom::deg2rad;

namespace {

JointVector random_q(std::mt19937_64& rng, const arm::ArmModel& m) {
  JointVector q;
  for (int i = 0; i < arm::kJoints; ++i) {
    std::uniform_real_distribution<double> u(m.joints[i].lower, m.joints[i].upper);
    q[i] = u(rng);
  }
  return q;
}

TwinMessage random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 8);
  std::uniform_int_distribution<std::int64_t> id(0, 1'000'000'000'000LL);
  std::uniform_real_distribution<double> u(-10.0, 10.0), s(1e-6, 1.0);
  std::bernoulli_distribution coin;
  JointVector q;
  for (int i = 0; i < 6; ++i) q[i] = u(rng);
  TwinMessage m;
  m.id = id(rng);
  switch (kind(rng)) {
    case 0: m.payload = Hello{"v" + std::to_string(id(rng))}; break;
    case 1: m.payload = MoveJ{q, s(rng)}; break;
    case 2: m.payload = GetPos{}; break;
    case 3: m.payload = Pos{q}; break;
    case 4: {
      Ack a;
      if (coin(rng)) a.version = "1";
      if (coin(rng)) a.eta = std::abs(u(rng));
      m.payload = a;
      break;
    }
    case 5: m.payload = Err{"busy", "text with \"quotes\" and \\ and \n"}; break;
    case 6: m.payload = Laser{static_cast<int>(id(rng) % 4), coin(rng)}; break;
    case 7: {
      State st;
      st.reply = coin(rng);
      if (st.reply) {
        st.moving = coin(rng);
        st.clock = std::abs(u(rng));
        st.last_arrival = std::abs(u(rng));
        st.lasers = {coin(rng), coin(rng)};
      } else {
        st.advance = std::abs(u(rng));
      }
      m.payload = st;
      break;
    }
    default: m.payload = Halt{}; break;
  }
  return m;
}

State advance(double dt) {
  State s;
  s.advance = dt;
  return s;
}

const DecodeError* as_error(const DecodeResult& r) { return std::get_if<DecodeError>(&r); }

}  // namespace

TEST(Protocol, MoveJZerosRoundTrips) {
  const TwinMessage m{7, MoveJ{JointVector::Zero(), 1.0}};
  const auto line = encode(m);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto back = decode(line);
  ASSERT_TRUE(std::holds_alternative<TwinMessage>(back));
  EXPECT_EQ(std::get<TwinMessage>(back), m);
}

TEST(Protocol, RandomMessagesRoundTripExactly) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5000; ++k) {
    const auto m = random_message(rng);
    const auto line = encode(m);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const auto back = decode(line + "\r\n");
    ASSERT_TRUE(std::holds_alternative<TwinMessage>(back)) << line;
    EXPECT_EQ(std::get<TwinMessage>(back), m) << line;
  }
}

TEST(Protocol, StructuredErrors) {
  const auto line = encode({3, MoveJ{JointVector::Zero(), 0.5}});
  const auto* e = as_error(decode(line.substr(0, line.size() / 2)));
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->code, Errc::MalformedMessage);

  e = as_error(decode(R"({"type":"JUMP","id":4})"));
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->code, Errc::UnknownType);
  EXPECT_EQ(e->id, 4);

  e = as_error(decode(R"({"type":"MOVEJ","id":5,"q":[0,0,0,0,0],"speed":1})"));
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->code, Errc::BadArity);
  EXPECT_EQ(e->id, 5);

  for (const char* bad : {"", "[]", "42", R"({"id":1})", R"({"type":"GETPOS"})",
                          R"({"type":"GETPOS","id":-1})", R"({"type":"GETPOS","id":1.5})",
                          R"({"type":"MOVEJ","id":1,"q":[0,0,0,0,0,"x"],"speed":1})",
                          R"({"type":"LASER","id":1,"device":0})"}) {
    e = as_error(decode(bad));
    ASSERT_NE(e, nullptr) << bad;
    EXPECT_EQ(e->code, Errc::MalformedMessage) << bad;
  }
  EXPECT_NE(as_error(decode(std::string(kMaxLineBytes + 1, ' '))), nullptr);
}

TEST(Protocol, FuzzNeverCrashes) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> byte(0, 255), len(0, 200);
  std::vector<std::string> seeds;
  for (int k = 0; k < 50; ++k) seeds.push_back(encode(random_message(rng)));
  int parsed = 0, rejected = 0;
  for (int k = 0; k < 10000; ++k) {
    std::string line;
    if (k % 2 == 0) {
      const int n = len(rng);
      for (int i = 0; i < n; ++i) line.push_back(static_cast<char>(byte(rng)));
    } else {
      line = seeds[k % seeds.size()];
      std::uniform_int_distribution<std::size_t> pos(0, line.size() - 1);
      for (int i = 0; i < 1 + k % 4; ++i) line[pos(rng)] = static_cast<char>(byte(rng));
    }
    const auto r = decode(line);
    if (std::holds_alternative<TwinMessage>(r)) {
      ++parsed;
      // anything accepted must re-encode to something that decodes identically
      const auto again = decode(encode(std::get<TwinMessage>(r)));
      ASSERT_TRUE(std::holds_alternative<TwinMessage>(again));
      EXPECT_EQ(std::get<TwinMessage>(again), std::get<TwinMessage>(r));
    } else {
      ++rejected;
    }
  }
  EXPECT_EQ(parsed + rejected, 10000);
  EXPECT_GT(rejected, 5000);
}

TEST(EmulatorStep, GoalEqualsCurrentStopsImmediately) {
  EmulatorState s;
  s.q << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  s.goal = s.q;
  s.moving = true;
  s.rate.setConstant(1.0);
  const auto t = emulator_step(s, 0.01);
  EXPECT_FALSE(t.moving);
  EXPECT_EQ(t.q, s.q);
  EXPECT_NEAR(t.clock, 0.01, 1e-15);
}

TEST(EmulatorStep, ConstantVelocitySingleJoint) {
  EmulatorState s;
  s.goal[0] = deg2rad(60.0);
  s.rate.setConstant(deg2rad(60.0));
  s.moving = true;
  s = emulator_step(s, 0.5);
  EXPECT_NEAR(s.q[0], deg2rad(30.0), 1e-12);
  EXPECT_TRUE(s.moving);
  s = emulator_step(s, 0.5);
  EXPECT_NEAR(s.q[0], deg2rad(60.0), 1e-12);
  EXPECT_FALSE(s.moving);
  EXPECT_DOUBLE_EQ(s.clock, 1.0);
}

TEST(EmulatorStep, ArrivalMatchesClosedFormAndNeverOvershoots) {
  const auto arm = arm::ArmModel::default_model();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> sp(0.1, 1.0), dt_dist(0.005, 0.2);
  for (int k = 0; k < 300; ++k) {
    EmulatorState s;
    s.q = random_q(rng, arm);
    const JointVector start = s.q;
    s.goal = random_q(rng, arm);
    const double speed = sp(rng), dt = dt_dist(rng);
    double expected = 0.0;
    for (int i = 0; i < 6; ++i) {
      s.rate[i] = speed * arm.joints[i].max_speed;
      expected = std::max(expected, std::abs(s.goal[i] - start[i]) / s.rate[i]);
    }
    EXPECT_NEAR(expected, arm::move_duration(arm, start, s.goal, speed), 1e-12);
    s.moving = true;
    while (s.moving) {
      s = emulator_step(s, dt);
      for (int i = 0; i < 6; ++i) {
        EXPECT_GE(s.q[i], std::min(start[i], s.goal[i]) - 1e-12);
        EXPECT_LE(s.q[i], std::max(start[i], s.goal[i]) + 1e-12);
      }
    }
    EXPECT_EQ(s.q, s.goal);
    EXPECT_GE(s.clock, expected - 1e-9);
    EXPECT_LT(s.clock, expected + dt + 1e-9);
  }
}

TEST(Emulator, HandlesRequestsInSimTime) {
  const auto arm = arm::ArmModel::default_model();
  Emulator emu(arm, ClockMode::Sim, 2);
  const auto hello = emu.handle({1, Hello{}});
  ASSERT_EQ(hello.type(), MsgType::Ack);
  EXPECT_EQ(std::get<Ack>(hello.payload).version, "1");

  JointVector goal = JointVector::Zero();
  goal[0] = deg2rad(90.0);
  const auto ack = emu.handle({2, MoveJ{goal, 1.0}});
  ASSERT_EQ(ack.type(), MsgType::Ack);
  const double eta = *std::get<Ack>(ack.payload).eta;
  EXPECT_NEAR(eta, arm::move_duration(arm, JointVector::Zero(), goal), 1e-12);

  const auto busy = emu.handle({3, MoveJ{JointVector::Zero(), 1.0}});
  ASSERT_EQ(busy.type(), MsgType::Err);
  EXPECT_EQ(std::get<Err>(busy.payload).code, "busy");

  emu.handle({4, advance(eta / 2)});
  const auto pos = emu.handle({5, GetPos{}});
  ASSERT_EQ(pos.type(), MsgType::Pos);
  const double q0 = std::get<Pos>(pos.payload).q[0];
  EXPECT_GT(q0, 0.0);
  EXPECT_LT(q0, goal[0]);
  EXPECT_NEAR(q0, goal[0] / 2, 1e-12);

  const auto st = emu.handle({6, advance(eta)});
  EXPECT_FALSE(std::get<State>(st.payload).moving);
  EXPECT_NEAR(std::get<State>(st.payload).last_arrival, eta, 1e-12);

  JointVector outside = JointVector::Zero();
  outside[1] = deg2rad(175.0);
  EXPECT_EQ(std::get<Err>(emu.handle({7, MoveJ{outside, 1.0}}).payload).code, "joint-limit");
  EXPECT_EQ(std::get<Err>(emu.handle({8, MoveJ{goal, 0.0}}).payload).code, "bad-speed");
  EXPECT_EQ(std::get<Err>(emu.handle({9, Laser{5, true}}).payload).code, "bad-device");
  emu.handle({10, Laser{1, true}});
  EXPECT_EQ(emu.snapshot().lasers, (std::vector<bool>{false, true}));
}

TEST(Emulator, HaltStopsInPlace) {
  const auto arm = arm::ArmModel::default_model();
  Emulator emu(arm, ClockMode::Sim);
  JointVector goal = JointVector::Zero();
  goal[2] = 1.0;
  emu.handle({1, MoveJ{goal, 1.0}});
  emu.handle({2, advance(0.1)});
  emu.handle({3, Halt{}});
  const auto s = emu.snapshot();
  EXPECT_FALSE(s.moving);
  EXPECT_GT(s.q[2], 0.0);
  EXPECT_LT(s.q[2], 1.0);
  emu.handle({4, advance(5.0)});
  EXPECT_EQ(emu.snapshot().q, s.q);
}

TEST(Emulator, WallClockMoves) {
  const auto arm = arm::ArmModel::default_model();
  Emulator emu(arm, ClockMode::Wall);
  JointVector goal = JointVector::Zero();
  goal[0] = deg2rad(150.0);
  emu.handle({1, MoveJ{goal, 1.0}});
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  const double q0 = std::get<Pos>(emu.handle({2, GetPos{}}).payload).q[0];
  EXPECT_GT(q0, 0.0);
  EXPECT_LT(q0, goal[0]);
  EXPECT_EQ(std::get<Err>(emu.handle({3, advance(1.0)}).payload).code, "sim-only");
}

class Served : public ::testing::Test {
 protected:
  void SetUp() override {
    emu_ = std::make_unique<Emulator>(arm::ArmModel::default_model(), ClockMode::Sim);
    server_ = std::make_unique<TwinServer>(*emu_, Endpoint{"127.0.0.1", 0});
    server_->record_transcript(true);
    server_->start();
  }
  void TearDown() override { server_->stop(); }
  Endpoint ep() const { return {"127.0.0.1", server_->port()}; }
  std::unique_ptr<Emulator> emu_;
  std::unique_ptr<TwinServer> server_;
};

TEST_F(Served, HelloMoveAndGetPos) {
  TwinClient c(ep());
  const auto hello = c.call(Hello{});
  EXPECT_EQ(std::get<Ack>(hello.payload).version, "1");
  JointVector goal = JointVector::Zero();
  goal[0] = 1.0;
  c.call(MoveJ{goal, 0.5});
  c.call(advance(0.2));
  const auto pos = c.call(GetPos{});
  const double q0 = std::get<Pos>(pos.payload).q[0];
  EXPECT_GT(q0, 0.0);
  EXPECT_LT(q0, 1.0);
  try {
    c.call(MoveJ{JointVector::Zero(), 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TwinRejected);
  }
}

TEST_F(Served, BadArityReply) {
  TwinClient c(ep());
  const auto reply = c.request_raw(R"({"type":"MOVEJ","id":1,"q":[0,0,0,0,0],"speed":1})");
  const auto m = decode(reply);
  ASSERT_TRUE(std::holds_alternative<TwinMessage>(m));
  const auto& msg = std::get<TwinMessage>(m);
  ASSERT_EQ(msg.type(), MsgType::Err);
  EXPECT_EQ(std::get<Err>(msg.payload).code, "bad-arity");
  EXPECT_EQ(msg.id, 1);
}

TEST_F(Served, SecondClientIsTurnedAway) {
  TwinClient first(ep());
  first.call(Hello{});
  auto second = LineSocket::connect(ep(), std::chrono::milliseconds(2000));
  const auto line = second.read_line(std::chrono::milliseconds(2000));
  ASSERT_TRUE(line.has_value());
  const auto m = decode(*line);
  ASSERT_TRUE(std::holds_alternative<TwinMessage>(m));
  EXPECT_EQ(std::get<Err>(std::get<TwinMessage>(m).payload).code, "busy");
  EXPECT_NO_THROW(first.call(GetPos{}));
}

TEST_F(Served, ReconnectAfterDisconnect) {
  {
    TwinClient a(ep());
    a.call(Hello{});
  }
  for (int i = 0; i < 100 && server_->connections_served() < 1; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  TwinClient b(ep());
  bool ok = false;
  for (int i = 0; i < 50 && !ok; ++i) {
    try {
      b.call(Hello{});
      ok = true;
    } catch (const Error&) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
      b = TwinClient(ep());
    }
  }
  EXPECT_TRUE(ok);
}

TEST_F(Served, RepliesMatchRequestsInOrder) {
  TwinClient c(ep());
  c.record_transcript(true);
  std::mt19937_64 rng(4);
  const auto arm = arm::ArmModel::default_model();
  std::uniform_int_distribution<int> kind(0, 4);
  for (int k = 0; k < 1000; ++k) {
    switch (kind(rng)) {
      case 0: c.request(Hello{}); break;
      case 1: c.request(MoveJ{random_q(rng, arm), 1.0}); break;
      case 2: c.request(GetPos{}); break;
      case 3: c.request(Laser{k % 4, k % 2 == 0}); break;
      default: c.request(advance(0.5)); break;
    }
  }
  const auto& t = c.transcript();
  ASSERT_EQ(t.size(), 2000u);
  std::int64_t expected = 1;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    ASSERT_EQ(t[i].direction, Direction::Out);
    ASSERT_EQ(t[i + 1].direction, Direction::In);
    const auto req = std::get<TwinMessage>(decode(t[i].line));
    const auto rep = std::get<TwinMessage>(decode(t[i + 1].line));
    EXPECT_EQ(req.id, expected);
    EXPECT_EQ(rep.id, req.id);
    EXPECT_TRUE(is_request(req));
    EXPECT_FALSE(is_request(rep));
    ++expected;
  }
  // the server saw the same exchange
  const auto st = server_->transcript();
  ASSERT_EQ(st.size(), t.size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    EXPECT_EQ(st[i].line, t[i].line);
    EXPECT_NE(st[i].direction, t[i].direction);
  }
}

TEST_F(Served, ClientReportsDeadLink) {
  TwinClient c(ep());
  c.call(Hello{});
  server_->stop();
  try {
    c.call(GetPos{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TwinDisconnected);
  }
}

TEST(Endpoint, Parsing) {
  const auto a = parse_endpoint("10.0.0.2:7070");
  EXPECT_EQ(a.host, "10.0.0.2");
  EXPECT_EQ(a.port, 7070);
  EXPECT_EQ(parse_endpoint(":80").port, 80);
  EXPECT_THROW(parse_endpoint("nohost"), Error);
  EXPECT_THROW(parse_endpoint("h:99999"), Error);
}

class DemoProgram : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    plan_ = new plan::Plan(plan::make_plan(demo::bedframe_workcell(), arm::ArmModel::default_model(),
                                           demo::cross_rig()));
  }
  static void TearDownTestSuite() { delete plan_; }
  static plan::Plan* plan_;
};
plan::Plan* DemoProgram::plan_ = nullptr;

TEST_F(DemoProgram, ExportParsesBack) {
  const auto prog = export_program(*plan_);
  ASSERT_EQ(prog.size(), 1 + 3 * plan_->solutions.size());
  EXPECT_EQ(prog.front().type(), MsgType::Hello);
  for (std::size_t i = 0; i < prog.size(); ++i) EXPECT_EQ(prog[i].id, static_cast<std::int64_t>(i + 1));
  EXPECT_EQ(parse_program(program_text(prog)), prog);
  try {
    parse_program("{\"type\":\"HELLO\",\"id\":1,\"version\":\"1\"}\nnot json\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedMessage);
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
  }
}

TEST_F(DemoProgram, ReplayClockMatchesCycleEstimate) {
  const auto arm = arm::ArmModel::default_model();
  Emulator emu(arm, ClockMode::Sim, 2, plan_->home);
  TwinServer server(emu, {"127.0.0.1", 0});
  server.start();
  TwinClient client({"127.0.0.1", server.port()});
  const auto replies = replay_program(client, export_program(*plan_), true, 0.1);
  server.stop();

  double eta_sum = 0.0;
  for (const auto& r : replies) {
    ASSERT_NE(r.type(), MsgType::Err);
    if (const auto* a = std::get_if<Ack>(&r.payload); a && a->eta) eta_sum += *a->eta;
  }
  const double fixed = plan_->dwell_s * plan_->solutions.size() +
                       plan_->base_move_s * (plan_->stations.size() - 1);
  // per-move arrival times use the estimator's formula exactly
  EXPECT_NEAR(eta_sum, plan_->estimated_cycle_s - fixed, 1e-9);
  // stepping the clock reaches the estimate within 5%
  const double stepped = emu.snapshot().clock + fixed;
  EXPECT_NEAR(stepped, plan_->estimated_cycle_s, 0.05 * plan_->estimated_cycle_s);
  EXPECT_EQ(emu.snapshot().q, plan_->solutions.back().q);
}
