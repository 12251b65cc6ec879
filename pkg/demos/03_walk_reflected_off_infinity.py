"""
Simulating the walk that reflects off of infinity
=================================================

The level-n chain moves like the ordinary weighted walk while inside
the ball.  Stepping onto the shell consults the harmonic measure of
the ball seen from far away: the walker is teleported back according
to where a trajectory escaping to infinity would re-enter.  Speeding
the clock up with the level makes the family of chains consistent,
and the consistency is checkable.
"""

import freewalk as fw

oracle = fw.zoo_oracle("binary_tree")
ex = fw.Exhaustion(oracle)
kernel = fw.build_kernel(oracle, ex, 3)
print(f"level-3 kernel: {kernel.n_core} core states, "
      f"{kernel.n_shell} shell states")

# A short trajectory.  Passes through infinity show up as events with
# an exit vertex (on the shell) and a re-entry vertex (sampled from
# harmonic measure; on a tree it is the exit's parent, deterministically).
traj = fw.simulate(kernel, start_key=1, stop=fw.FixedSteps(12), seed=7)
for ev in traj.events:
    if hasattr(ev, "exit_key"):
        print(f"  pass: out at {ev.exit_key}, back in at {ev.reentry_key}")
    else:
        print(f"  visit {ev.key:3d}  held {ev.holding_time:.4f}")
print(f"{traj.transitions} transitions, {len(traj.passes())} passes, "
      f"elapsed clock {traj.elapsed:.4f}")

# Consistency across levels: watching the level-5 chain only while it
# is inside the level-3 ball reproduces the level-3 chain exactly.
report = fw.consistency_check(oracle, ex, 3, 5)
print(f"\nlevels (3, 5) watched-chain deviation: {report.deviation:.2e} "
      f"({'pass' if report.passed else 'fail'})")

# The clock grows geometrically with the level so that excursions
# beyond every ball take vanishing time: return times to the root
# shrink by a constant factor per level once the rate schedule beats
# the volume growth.
sched = fw.schedule_report(oracle, ex, fw.RateSchedule(1.0, 4.0),
                           levels=[1, 2, 3, 4, 5])
print("\nexpected return time to the root, by level:")
for i, (lvl, rt) in enumerate(zip(sched.levels, sched.return_times)):
    inc = f"  (+{sched.increments[i - 1]:.6f})" if i else ""
    print(f"  level {lvl}: {rt:.6f}{inc}")
print("increments shrinking:", sched.converging)
