"""The service layer end to end: submit, claim, reject, complete over HTTP.

Boots a manual-QC live system on an ephemeral port, plays a short operator
session against the JSON API, and shows the XML content negotiation.  This is
the same surface the browser console uses.
"""

import json
import urllib.request

from orbitflow.service import ApiServer, LiveSystem, serve
from orbitflow.sim import SimConfig


def call(method, url, body=None, headers=None):
    data = json.dumps(body).encode() if body is not None else None
    request = urllib.request.Request(url, data=data, method=method,
                                     headers=headers or {})
    if data:
        request.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(request) as response:
        payload = response.read()
        if response.headers.get_content_type() == "application/json":
            return json.loads(payload)
        return payload.decode()


system = LiveSystem(SimConfig(order_rate=0, duration_days=0, auto_qc=False))
server = serve(system, port=0)
base = f"http://127.0.0.1:{server.port}"
print("serving on", base)

order = call("POST", f"{base}/work-orders", {
    "satellite": "IRS-P6", "sensor": "AWIFS", "product_type": "STANDARD",
    "correction_level": "GEO", "media": "DIGITAL", "path": 100, "row": 60,
    "acquisition_date": "2026-01-02",
    "parameters": {"customer": "C001", "region": "NORTH",
                   "amount": "220.00", "quantity": "1"},
})
print("created", order["id"], "->",
      " ".join(s["center"] for s in order["plan"]["steps"]))

system.drain()  # the automated centers run the order up to manual QC

tasks = call("GET", f"{base}/tasks?center=QC")["tasks"]
print("QC queue:", [(t["task_id"], t["work_order_id"]) for t in tasks])

task_id = tasks[0]["task_id"]
claim = call("POST", f"{base}/tasks/{task_id}/claim", {"operator_id": "asha"})
print("claimed by", claim["operator_id"])

rejected = call("POST", f"{base}/tasks/{task_id}/complete", {
    "operator_id": "asha", "outcome": "REJECT", "reject_target": "DP",
    "note": "radiometric banding",
})
print("rejected to DP; order status:", rejected["status"])

system.drain()  # rework runs and the order reappears at QC
task_id = call("GET", f"{base}/tasks?center=QC")["tasks"][0]["task_id"]
call("POST", f"{base}/tasks/{task_id}/claim", {"operator_id": "asha"})
done = call("POST", f"{base}/tasks/{task_id}/complete",
            {"operator_id": "asha", "outcome": "COMPLETE"})
system.drain()

final = call("GET", f"{base}/work-orders/{order['id']}")
print("after approval:", final["status"],
      "with", len(final["history"]), "history events,",
      "qc_note =", final["parameters"].get("qc_note"))

pending = call("GET", f"{base}/reports/pending")
print("pending per center:", {r[0]: r[1] for r in pending["rows"] if r[1]})

xml_text = call("GET", f"{base}/work-orders/{order['id']}",
                headers={"Accept": "application/xml"})
print("XML negotiation:", xml_text[:88], "...")

server.shutdown()
system.stop()
