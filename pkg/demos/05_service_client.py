"""
Driving the HTTP service: upload, optimize, compare three seeds
===============================================================

The service runs every search as an asynchronous job and stores the
result under a content-addressed run id. This script starts the service
in-process, uploads a small case, launches the same outage search under
three seeds, and prints the comparison an operator console would show.
"""

import tempfile
import threading
import time

import httpx
import uvicorn

from gridshed import Bus, Line, Load, Network
from gridshed.caseio import serialize_case
from gridshed.service import create_app

# start the service on a local port, storing runs in a temp dir
workdir = tempfile.mkdtemp(prefix="gridshed-demo-")
server = uvicorn.Server(uvicorn.Config(
    create_app(workdir), host="127.0.0.1", port=8731, log_level="warning",
))
threading.Thread(target=server.run, daemon=True).start()

client = httpx.Client(base_url="http://127.0.0.1:8731", timeout=60.0)
for _ in range(100):
    try:
        if client.get("/health").status_code == 200:
            break
    except httpx.TransportError:
        time.sleep(0.05)

# a hub-and-spoke case whose trunk cannot carry all four loads
loads = [30.0, 25.0, 20.0, 15.0]
buses = [Bus(id=0, kind="slack", base_kv=138.0, v_setpoint=1.0),
         Bus(id=1, kind="pq", base_kv=138.0)]
lines = [Line(id=0, from_bus=0, to_bus=1, r=0.002, x=0.02, rating_mva=70.0)]
demand = []
for k, p in enumerate(loads):
    buses.append(Bus(id=2 + k, kind="pq", base_kv=138.0))
    lines.append(Line(id=1 + k, from_bus=1, to_bus=2 + k,
                      r=0.001, x=0.01, rating_mva=300.0))
    demand.append(Load(id=k, bus=2 + k, p_mw=p, q_mvar=0.3 * p))
net = Network(base_mva=100.0, buses=tuple(buses), lines=tuple(lines),
              generators=(), loads=tuple(demand), shunts=())

resp = client.post("/cases", content=serialize_case(net).encode())
case_id = resp.json()["case_id"]
print(f"uploaded case {case_id[:12]}... "
      f"({resp.json()['total_p_mw']:.0f} MW over {resp.json()['loads']} loads)")

# quick what-if: is the intact system even safe?
safety = client.post(f"/cases/{case_id}/analyze", json={}).json()["safety"]
print(f"intact system safe: {safety['safe']} "
      f"(worst loading {safety['worst_line_loading']:.0f}%)")

# launch the same partial search under three seeds
jobs = {}
for seed in (0, 1, 2):
    resp = client.post(f"/cases/{case_id}/optimize", json={
        "mode": "partial", "seed": seed, "saturate": 25,
        "population_size": 40, "max_iterations": 200,
    })
    jobs[seed] = resp.json()["job_id"]

# poll until every job lands
plans = {}
while jobs:
    for seed, job_id in list(jobs.items()):
        job = client.get(f"/jobs/{job_id}").json()
        if job["state"] == "done":
            plans[seed] = client.get(f"/runs/{job['run_id']}").json()
            del jobs[seed]
        elif job["state"] == "failed":
            raise SystemExit(f"seed {seed} failed: {job['error']}")
    time.sleep(0.1)

print("\nseed  shed MW  plan")
for seed in sorted(plans):
    result = plans[seed]["payload"]["result"]
    sheds = ", ".join(f"{i}@{f:.0%}" for i, f in result["shed_loads"])
    print(f"  {seed}   {result['shed_mw']:7.1f}  {sheds or 'nothing'}")

server.should_exit = True
