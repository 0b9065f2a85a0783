import statistics

import pytest

from gradroute.config import ExperimentConfig
from gradroute.engine import Simulation, SimulationError, run
from gradroute.learner import LearnerConfig
from gradroute.network import Topology, TrafficSpec, shortest_path_delay
from gradroute.presets import braess_network, preset, six_node_network

FROZEN = LearnerConfig(beta=0.99, gamma=1e-300)  # effectively no learning


def force_row(sim, router_label, dest_label, logits):
    topo = sim.topology
    row = sim.tables[topo.node_id(router_label)].rows[topo.node_id(dest_label)]
    row[:] = logits


class TestContentionArithmetic:
    def run_forced(self, logits, steps=60):
        cfg = preset("contention").with_overrides(steps=steps, learner=FROZEN)
        sim = Simulation(cfg)
        force_row(sim, "A", "B", logits)
        return sim, [sim.step() for _ in range(steps)]

    def test_always_top_settles_at_minus_22(self):
        sim, stats = self.run_forced([30.0, -30.0])
        # steady state from tick 2: one delivery (trip 1) and one drop per tick
        for s in stats[1:]:
            assert s.reward.underlying == -1.0
            assert s.reward.shaping == -21.0
            assert s.reward.total == -22.0
            assert s.delivered == 1 and s.dropped == 1
        assert stats[0].reward.total == -21.0  # first tick: drop but no arrival yet

    def test_always_bottom_settles_at_minus_12(self):
        sim, stats = self.run_forced([-30.0, 30.0])
        for s in stats[:6]:  # nothing arrives during the first transit
            assert s.reward.total == 0.0 and s.dropped == 0
        for s in stats[6:]:
            assert s.reward.total == -12.0
            assert s.delivered == 2 and s.dropped == 0

    def test_uniform_policy_long_run_average_matches_enumeration(self):
        from gradroute.oracles import contention_expected_reward

        cfg = preset("contention").with_overrides(steps=40_000, learner=FROZEN)
        sim = Simulation(cfg)
        res = sim.run()
        assert res.average_reward == pytest.approx(
            contention_expected_reward(0.5, 21.0), abs=0.3
        )

    def test_drop_tie_break_is_deterministic(self):
        sim, stats = self.run_forced([30.0, -30.0], steps=5)
        # the lower-id packet transmits; exactly one drop per tick either way
        assert all(s.dropped == 1 for s in stats)


class TestNodeFlowArithmetic:
    def test_all_left_costs_116_per_packet(self):
        cfg = preset("braess1").with_overrides(steps=10, learner=FROZEN)
        sim = Simulation(cfg)
        force_row(sim, "A", "B", [40.0, -40.0])
        stats = [sim.step() for _ in range(10)]
        for s in stats:
            assert s.reward.total == pytest.approx(-116.0 * 6)
            assert s.delivered == 6 and s.in_flight == 0

    def test_right_with_shortcut_disabled_costs_116(self):
        cfg = preset("braess1").with_overrides(steps=5, learner=FROZEN)
        sim = Simulation(cfg)
        force_row(sim, "A", "B", [-40.0, 40.0])
        force_row(sim, "E", "B", [40.0, -40.0])
        for _ in range(5):
            assert sim.step().reward.total == pytest.approx(-116.0 * 6)

    def test_uniform_policy_matches_binomial_enumeration(self):
        from gradroute.oracles import braess_expected_cost

        cfg = preset("braess1").with_overrides(steps=30_000, learner=FROZEN)
        res = Simulation(cfg).run()
        expected = -6.0 * braess_expected_cost(0.5, 0.5)
        assert res.average_reward == pytest.approx(expected, rel=0.01)

    def test_cycle_in_node_flow_topology_aborts(self):
        topo, traffic = braess_network(augmented=True)
        loop = Topology(
            nodes=topo.nodes,
            links=topo.links + (type(topo.links[0])(topo.node_id("G"), topo.node_id("E"), 1),),
            cost_model=topo.cost_model,
            node_costs=topo.node_costs,
        )
        cfg = ExperimentConfig(topology=loop, traffic=traffic, learner=FROZEN, steps=50)
        sim = Simulation(cfg)
        force_row(sim, "A", "B", [-40.0, 40.0])
        force_row(sim, "E", "B", [-40.0, 40.0])  # E always picks G, G bounces to E
        with pytest.raises(SimulationError):
            for _ in range(50):
                sim.step()


class TestConservationAndDeterminism:
    @pytest.mark.parametrize("name", ["triangle", "contention", "six_node", "braess1"])
    def test_conservation_every_tick(self, name):
        cfg = preset(name).with_overrides(steps=400)
        sim = Simulation(cfg)
        gen = deliv = drop = 0
        for _ in range(cfg.steps):
            s = sim.step()
            gen += s.generated
            deliv += s.delivered
            drop += s.dropped
            assert gen == deliv + drop + s.in_flight
            assert s.reward.total == s.reward.underlying + s.reward.shaping

    @pytest.mark.parametrize("name", ["triangle", "contention", "six_node", "braess1"])
    def test_same_seed_same_stats(self, name):
        cfg = preset(name).with_overrides(steps=300, seed=5)
        a = [Simulation(cfg).step() for _ in range(1)]  # warm-up construction path
        run_a = Simulation(cfg)
        run_b = Simulation(cfg)
        stats_a = [run_a.step() for _ in range(300)]
        stats_b = [run_b.step() for _ in range(300)]
        assert stats_a == stats_b
        assert run_a.result().theta == run_b.result().theta

    def test_different_seeds_differ(self):
        cfg = preset("triangle").with_overrides(steps=200)
        a = Simulation(cfg.with_overrides(seed=1)).run()
        b = Simulation(cfg.with_overrides(seed=2)).run()
        assert a.average_reward != b.average_reward

    def test_zero_steps_returns_initial_state(self):
        cfg = preset("triangle")
        res = Simulation(cfg).run(steps=0)
        assert res.steps == 0
        assert res.generated == 0
        assert all(
            v == 0.0 for dests in res.theta.values() for row in dests.values() for v in row
        )


class TestTripTimes:
    def test_trips_bounded_below_by_shortest_path(self):
        cfg = preset("triangle").with_overrides(steps=20_000, learner=FROZEN)
        sim = Simulation(cfg, record_trips=True)
        sim.run()
        topo = cfg.topology
        assert len(sim.trip_log) > 50_000
        for source, dest, trip in sim.trip_log:
            assert trip >= shortest_path_delay(topo, source, dest)

    def test_uniform_routing_age_spot_check(self):
        # uncapacitated triangle at uniform policy: packets keep arriving and
        # the tail of the trip distribution stays short
        cfg = preset("triangle").with_overrides(steps=100_000, learner=FROZEN)
        sim = Simulation(cfg, record_trips=True)
        sim.run()
        trips = sorted(t for _, _, t in sim.trip_log)
        p99 = trips[int(0.99 * len(trips))]
        assert p99 <= 50
        assert sim.max_in_flight_age() <= 200

    def test_six_node_direct_policy_delivers_everything_in_one_hop(self):
        cfg = preset("six_node").with_overrides(steps=3_000, learner=FROZEN)
        sim = Simulation(cfg, record_trips=True)
        topo = cfg.topology
        for router, table in sim.tables.items():
            for dest in table.rows:
                direct = [
                     40.0 if topo.links[i].dst == dest else -40.0
                    for i in topo.out_link_indices(router)
                ]
                table.rows[dest][:] = direct
        res = sim.run()
        assert res.cycles_detected == 0
        assert all(trip == 1 for _, _, trip in sim.trip_log)
        # reward equals the shortest-path optimum from the second tick on
        assert res.average_reward == pytest.approx(-6.0, abs=0.1)


class TestRewardDecomposition:
    def test_six_node_cycle_penalty_lands_in_shaping(self):
        cfg = preset("six_node").with_overrides(steps=300)
        sim = Simulation(cfg)
        saw_cycle = False
        for _ in range(cfg.steps):
            s = sim.step()
            assert s.reward.shaping == pytest.approx(-100.0 * s.cycles_detected)
            saw_cycle = saw_cycle or s.cycles_detected > 0
        assert saw_cycle  # uniform routing on a complete graph revisits quickly

    def test_run_helper_accumulates(self):
        cfg = preset("contention").with_overrides(steps=500)
        res = run(cfg)
        assert res.steps == 500
        assert res.generated == 1000
        assert res.generated == res.delivered + res.dropped + (
            res.generated - res.delivered - res.dropped
        )
