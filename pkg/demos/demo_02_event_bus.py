"""The messaging kernel: decoupled publish/subscribe, leases, and routing.

Demonstrates the three decouplings (referential, temporal, execution),
at-least-once redelivery after a consumer crash, and the cross-center event
router with duplicate suppression.
"""

from orbitflow.bus import Broker, EventRouter, RouterTable

broker = Broker("hyderabad")

# Referential decoupling: the publisher names a topic, not a receiver.
msg_id = broker.publish("workorder.created", b"<work-order/>", clock=0.0)
print("published with zero subscribers, id =", msg_id)

# Temporal decoupling: a durable subscription accumulates while offline.
qc_feed = broker.subscribe("qc-console", "workorder.assigned.qc")
for i in range(3):
    broker.publish("workorder.assigned.qc", f"<order-{i}/>".encode(), clock=float(i))
print("\nconsumer reconnects and catches up:")
while (msg := qc_feed.consume(clock=10.0, lease=30.0)) is not None:
    print("  got", msg.payload.decode(), "attempt", msg.attempts)
    qc_feed.ack(msg.id)

# At-least-once: a crashed consumer's lease expires and the message returns.
crashy = broker.subscribe("crashy", "workorder.created")
broker.publish("workorder.created", b"<precious/>", clock=20.0)
taken = crashy.consume(clock=21.0, lease=30.0)
print("\nconsumed but never acked:", taken.id)
requeued = broker.sweep_redelivery(clock=60.0)
print("sweep requeued", requeued, "message(s)")
retry = crashy.consume(clock=61.0, lease=30.0)
print("redelivered:", retry.id, "attempts =", retry.attempts)
crashy.ack(retry.id)

# The router forwards matching traffic to another center's broker exactly once.
remote = Broker("dehradun")
remote_feed = remote.subscribe("archive", "workorder.*")
router = EventRouter(broker, RouterTable(routes=[("workorder.*", "dehradun")]))
for i in range(4):
    broker.publish("workorder.completed", f"<done-{i}/>".encode(), clock=70.0 + i)
forwarded = router.pump({"dehradun": remote}, clock=80.0)
print("\nrouter forwarded", forwarded, "messages;",
      "second pump forwards", router.pump({"dehradun": remote}, clock=81.0))
count = 0
while remote_feed.consume(clock=90.0) is not None:
    count += 1
print("remote subscribers received", count)
