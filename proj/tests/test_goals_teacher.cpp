#include <cmath>
#include <vector>

#include "amigo/errors.hpp"
#include "amigo/goals.hpp"
#include "amigo/teacher.hpp"
#include "doctest.h"

using namespace amigo;

namespace {

GridState open_room() {
  GridState s;
  s.width = 6;
  s.height = 5;
  s.tiles.assign(30, Tile::empty());
  for (int x = 0; x < 6; ++x) s.at({x, 0}) = s.at({x, 4}) = Tile::wall();
  for (int y = 0; y < 5; ++y) s.at({0, y}) = s.at({5, y}) = Tile::wall();
  s.agent_pos = {1, 1};
  s.agent_dir = Direction::East;
  s.t_max = 100;
  s.extrinsic_goal_pos = {4, 3};
  s.at({4, 3}) = Tile::goal();
  return s;
}

GoalEpisode reached(int t_plus) {
  GoalEpisode g;
  g.status = GoalStatus::Reached;
  g.t_plus = t_plus;
  return g;
}

GoalEpisode expired() {
  GoalEpisode g;
  g.status = GoalStatus::Expired;
  return g;
}

TeacherState at_t_star(int t_star, RewardForm form = RewardForm::Threshold) {
  TeacherConfig c;
  c.reward_form = form;
  TeacherState st(c);
  st.t_star = t_star;
  return st;
}

}  // namespace

TEST_CASE("verify: untouched cell with the agent elsewhere is false") {
  GridState s = open_room();
  const GoalEpisode g = begin_goal(s, {3, 2});
  CHECK_FALSE(verify(g, s));
  apply_action(s, Action::TurnLeft);
  CHECK_FALSE(verify(g, s));
}

TEST_CASE("verify: picking up a key on the goal cell") {
  GridState s = open_room();
  s.at({2, 1}) = Tile::key(Color::Red);
  const GoalEpisode g = begin_goal(s, {2, 1});
  CHECK_FALSE(verify(g, s));
  apply_action(s, Action::PickUp);
  CHECK(verify(g, s));
}

TEST_CASE("verify: walking onto an empty goal cell") {
  GridState s = open_room();
  const GoalEpisode g = begin_goal(s, {2, 1});
  apply_action(s, Action::MoveForward);
  CHECK(verify(g, s));
}

TEST_CASE("verify: opening a door changes the flag") {
  GridState s = open_room();
  s.at({2, 1}) = Tile::door(Color::Green, DoorState::Closed);
  const GoalEpisode g = begin_goal(s, {2, 1});
  apply_action(s, Action::Toggle);
  CHECK(verify(g, s));
}

TEST_CASE("verify compares against the proposal-time snapshot") {
  GridState s = open_room();
  s.at({3, 3}) = Tile::ball(Color::Blue);
  s.at({3, 3}) = Tile::empty();  // changed before the goal is set
  const GoalEpisode g = begin_goal(s, {3, 3});
  CHECK_FALSE(verify(g, s));
  s.at({3, 3}) = Tile::ball(Color::Yellow);
  CHECK(verify(g, s));
  s.at({3, 3}) = Tile::empty();
  CHECK_FALSE(verify(g, s));
}

TEST_CASE("begin_goal rejects cells outside the grid") {
  const GridState s = open_room();
  CHECK_THROWS_AS(begin_goal(s, {6, 0}), EnvError);
  CHECK_THROWS_AS(begin_goal(s, {0, -1}), EnvError);
}

TEST_CASE("student intrinsic reward examples") {
  GridState s = open_room();
  GoalEpisode g = begin_goal(s, {2, 1});
  s.step = 1;
  CHECK(std::abs(student_intrinsic_reward(s, g) - 0.991) < 1e-9);
  s.step = 99;
  CHECK(std::abs(student_intrinsic_reward(s, g) - 0.109) < 1e-9);
  g.set_at_step = 90;
  CHECK(std::abs(student_intrinsic_reward(s, g, IntrinsicClock::SinceProposal) - (1.0 - 0.9 * 9 / 100.0)) < 1e-9);
}

TEST_CASE("t_plus counts steps since the proposal and is positive when reached") {
  GridState s = open_room();
  s.step = 5;
  GoalEpisode g = begin_goal(s, {2, 1});
  s.step = 12;
  CHECK(mark_reached(g, s) == 7);
  CHECK(g.status == GoalStatus::Reached);
  GoalEpisode same = begin_goal(s, {2, 1});
  CHECK(mark_reached(same, s) == 1);
  mark_expired(g);
  CHECK(g.t_plus == 0);
  CHECK(g.resolved());
}

TEST_CASE("threshold reward examples") {
  const TeacherState st = at_t_star(10);
  CHECK(reward_threshold(12, st) == 0.7);
  CHECK(reward_threshold(10, st) == 0.7);
  CHECK(reward_threshold(3, st) == -0.3);
  CHECK(reward_threshold(0, st) == -0.3);
}

TEST_CASE("gaussian reward examples") {
  TeacherState st = at_t_star(10, RewardForm::Gaussian);
  CHECK(reward_gaussian(10, st) == doctest::Approx(1.0));
  CHECK(reward_gaussian(0, st) == -1.0);
  const double sigma = st.effective_sigma();
  CHECK(sigma == 5.0);
  CHECK(std::abs(reward_gaussian(15, st) - 0.5) < 1e-9);
  st.config.sigma = 2.0;
  CHECK(std::abs(reward_gaussian(12, st) - 0.5) < 1e-9);
  // Same value as the log-density difference of a normal distribution.
  const auto log_n = [&](double x) { return -0.5 * std::log(2 * M_PI * 4.0) - (x - 10) * (x - 10) / 8.0; };
  CHECK(std::abs(reward_gaussian(7, st) - (1.0 + log_n(7) - log_n(10))) < 1e-9);
}

TEST_CASE("linear-exponential reward examples") {
  const TeacherState st = at_t_star(10, RewardForm::LinearExponential);
  CHECK(reward_linexp(10, st) == 1.0);
  CHECK(reward_linexp(0, st) == 0.0);
  CHECK(std::abs(reward_linexp(5, st) - 0.5) < 1e-9);
  CHECK(std::abs(reward_linexp(20, st) - std::exp(-1.0)) < 1e-9);
  CHECK(std::abs(reward_linexp(20, st) - 0.3679) < 1e-4);
}

TEST_CASE("reward ranges and the maximum at t_star") {
  for (int t_star : {1, 4, 17}) {
    for (RewardForm form : {RewardForm::Threshold, RewardForm::Gaussian, RewardForm::LinearExponential}) {
      const TeacherState st = at_t_star(t_star, form);
      const double peak = teacher_reward(t_star, st);
      for (int t = 0; t <= 100; ++t) {
        const double r = teacher_reward(t, st);
        INFO("form " << to_string(form) << " t_star " << t_star << " t " << t);
        CHECK(r <= peak + 1e-12);
        if (form == RewardForm::Threshold) CHECK((r == 0.7 || r == -0.3));
        if (form == RewardForm::LinearExponential) CHECK((r >= 0.0 && r <= 1.0));
        if (form == RewardForm::Gaussian) CHECK(r <= 1.0);
      }
    }
  }
}

TEST_CASE("reward form names") {
  CHECK(parse_reward_form("threshold") == RewardForm::Threshold);
  CHECK(parse_reward_form("gaussian") == RewardForm::Gaussian);
  CHECK(parse_reward_form("linear-exponential") == RewardForm::LinearExponential);
  CHECK(parse_reward_form(to_string(RewardForm::LinearExponential)) == RewardForm::LinearExponential);
  CHECK_THROWS(parse_reward_form("cubic"));
}

TEST_CASE("threshold rises after exactly ten qualifying successes") {
  TeacherState st = at_t_star(5);
  for (int i = 0; i < 9; ++i) {
    st = update_threshold(st, reached(5 + i));
    CHECK(st.t_star == 5);
    CHECK(st.streak == i + 1);
  }
  st = update_threshold(st, reached(5));
  CHECK(st.t_star == 6);
  CHECK(st.streak == 0);
}

TEST_CASE("a fast success or an expired goal resets the streak") {
  TeacherState st = at_t_star(5);
  for (int i = 0; i < 9; ++i) st = update_threshold(st, reached(8));
  st = update_threshold(st, reached(4));
  CHECK(st.streak == 0);
  CHECK(st.t_star == 5);
  for (int i = 0; i < 3; ++i) st = update_threshold(st, reached(8));
  st = update_threshold(st, expired());
  CHECK(st.streak == 0);
  CHECK(st.t_star == 5);
}

TEST_CASE("t_star never decreases under any outcome sequence") {
  Rng rng = make_rng(4, 0);
  TeacherState st;
  int prev = st.t_star;
  for (int i = 0; i < 5000; ++i) {
    const int r = static_cast<int>(uniform_index(rng, 40));
    st = update_threshold(st, r == 0 ? expired() : reached(r));
    CHECK(st.t_star >= prev);
    CHECK(st.streak < 10);
    CHECK(st.streak >= 0);
    prev = st.t_star;
  }
  CHECK(st.t_star > 1);
}

TEST_CASE("boundary bonus") {
  CHECK(boundary_bonus(Tile::door(Color::Red, DoorState::Locked), Tile::wall(), 0.1) == 0.1);
  CHECK(boundary_bonus(Tile::wall(), Tile::wall(), 0.1) == 0.0);
  CHECK(boundary_bonus(Tile::key(Color::Red), Tile::key(Color::Blue), 0.1) == 0.1);
  // Hidden box contents are not part of the triple.
  CHECK(boundary_bonus(Tile::box(Color::Red, Tile::key(Color::Blue)), Tile::box(Color::Red), 0.1) == 0.0);
}

TEST_CASE("novelty bonus") {
  TeacherConfig c;
  c.novelty_bonus = true;
  TeacherState st(c);
  record_proposal(st, Object::Key);
  CHECK(novelty_bonus(st, Object::Key) == doctest::Approx(0.1));
  for (int i = 0; i < 3; ++i) record_proposal(st, Object::Key);
  CHECK(novelty_bonus(st, Object::Key) == doctest::Approx(0.05));
  TeacherState off;
  record_proposal(off, Object::Door);
  CHECK(novelty_bonus(off, Object::Door) == 0.0);
}

TEST_CASE("goal descriptor is the object under the cell") {
  GridState s = open_room();
  s.at({2, 2}) = Tile::key(Color::Grey);
  CHECK(goal_descriptor(s, {2, 2}) == Object::Key);
  CHECK(goal_descriptor(s, {0, 0}) == Object::Wall);
}

TEST_CASE("teacher event total adds every bonus") {
  TeacherEvent ev;
  ev.reward = -0.3;
  ev.bonuses.boundary = 0.1;
  ev.bonuses.novelty = 0.05;
  ev.bonuses.extrinsic = 0.8;
  CHECK(ev.total_reward() == doctest::Approx(0.65));
}

TEST_CASE("uniform logits propose cells uniformly") {
  const int h = 4, w = 5, n = h * w, draws = 100000;
  std::vector<float> logits(static_cast<std::size_t>(n), 0.0f);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  Rng rng = make_rng(21, 0);
  for (int i = 0; i < draws; ++i) {
    const GoalSample s = sample_goal(logits, h, w, rng);
    REQUIRE(s.goal.x >= 0);
    REQUIRE(s.goal.x < w);
    REQUIRE(s.goal.y >= 0);
    REQUIRE(s.goal.y < h);
    counts[static_cast<std::size_t>(s.goal.y * w + s.goal.x)] += 1;
    CHECK(s.log_prob == doctest::Approx(-std::log(n)));
  }
  const double p = 1.0 / n, mean = draws * p, sd = std::sqrt(draws * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - mean) < 3 * sd + 1);
  CHECK(sample_goal(logits, h, w, rng).entropy == doctest::Approx(std::log(n)));
}

TEST_CASE("peaked logits propose the peak") {
  std::vector<float> logits(25, 0.0f);
  logits[1 * 5 + 1] = 20.0f;
  Rng rng = make_rng(2, 0);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto g = sample_goal(logits, 5, 5, rng).goal;
    hits += (g.x == 1 && g.y == 1);
  }
  CHECK(hits >= 990);
  CHECK_THROWS(sample_goal(logits, 4, 5, rng));
}
