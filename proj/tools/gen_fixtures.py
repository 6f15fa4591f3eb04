#!/usr/bin/env python3
"""Generates the bundled fixture snapshots under fixtures/.

The fixtures are committed; this script documents how they were produced and
regenerates them byte-for-byte. Each router is rendered in one of a few
configuration styles so that template selection and similarity scoring have
realistic variation to work with.

Usage: tools/gen_fixtures.py [output_dir]   (default: fixtures/)
"""

import ipaddress
import json
import os
import sys


def mask_of(length):
    return str(ipaddress.IPv4Network(f"0.0.0.0/{length}").netmask)


def wildcard_of(length):
    return str(ipaddress.IPv4Network(f"0.0.0.0/{length}").hostmask)


class Router:
    def __init__(self, name, style, asn=None):
        self.name = name
        self.style = style
        self.asn = asn
        self.ifaces = []  # (name, ip, length, cost, description)
        self.ospf = None  # dict(pid, networks, redistribute, extra)
        self.bgp = None  # list of lines (without indentation)
        self.tail = []  # list of (kind, lines) blocks rendered after routing
        self.router_id = None

    def add_iface(self, ip, length, cost=None, description=None):
        s = self.style
        index = len([i for i in self.ifaces if not i[0].startswith("Loop")])
        name = s["iface_fmt"].format(index + s.get("iface_base", 0))
        self.ifaces.append((name, ip, length, cost, description))
        return name

    def add_loopback(self, ip):
        self.ifaces.insert(0, ("Loopback0", ip, 32, None, None))
        self.router_id = ip


def render(router):
    s = router.style
    ind = s["indent"]
    bang = s["bang"]
    out = []

    def sep():
        if bang:
            out.append("!")

    if s.get("preamble"):
        sep()
        out.extend(s["preamble"])
    sep()
    out.append(f"hostname {router.name}")
    for name, ip, length, cost, desc in router.ifaces:
        sep()
        out.append(f"interface {name}")
        if desc and s.get("descriptions"):
            out.append(f"{ind}description {desc}")
        out.append(f"{ind}ip address {ip} {mask_of(length)}")
        if cost is not None:
            out.append(f"{ind}ip ospf cost {cost}")
        elif s.get("explicit_cost") and not name.startswith("Loop"):
            out.append(f"{ind}ip ospf cost 1")
        if s.get("no_shutdown"):
            out.append(f"{ind}no shutdown")
    if router.ospf:
        o = router.ospf
        sep()
        out.append(f"router ospf {o['pid']}")
        if router.router_id and s.get("ospf_router_id"):
            out.append(f"{ind}router-id {router.router_id}")
        if s.get("log_adj"):
            out.append(f"{ind}log-adjacency-changes")
        for line in o.get("redistribute", []):
            out.append(f"{ind}redistribute {line}")
        for addr, wild in o["networks"]:
            out.append(f"{ind}network {addr} {wild} area 0")
        for line in o.get("extra", []):
            out.append(f"{ind}{line}")
    if router.bgp:
        sep()
        out.append(f"router bgp {router.asn}")
        for line in router.bgp:
            out.append(f"{ind}{line}")
    for kind, lines in router.tail:
        sep()
        for line in lines:
            if line.startswith(" "):
                out.append(ind + line.lstrip())
            else:
                out.append(line)
    if s.get("epilogue"):
        sep()
        out.extend(s["epilogue"])
    return "\n".join(out) + "\n"


def host_doc(name, ip, length, gateway_router, gateway_ip):
    return {
        "hostname": name,
        "iface_ip": ip,
        "mask": mask_of(length),
        "gateway_router": gateway_router,
        "gateway_ip": gateway_ip,
    }


def write_snapshot(root, name, routers, hosts):
    base = os.path.join(root, name)
    os.makedirs(os.path.join(base, "configs"), exist_ok=True)
    os.makedirs(os.path.join(base, "hosts"), exist_ok=True)
    for r in routers:
        with open(os.path.join(base, "configs", r.name + ".cfg"), "w") as f:
            f.write(render(r))
    for h in hosts:
        with open(os.path.join(base, "hosts", h["hostname"] + ".json"), "w") as f:
            f.write(json.dumps(h, indent=2) + "\n")


IOS_CAMPUS = {
    "indent": " ",
    "bang": True,
    "preamble": ["version 15.2", "service timestamps debug datetime msec",
                 "no ip domain lookup"],
    "epilogue": ["line vty 0 4", " login", " transport input ssh", "!", "end"],
    "iface_fmt": "GigabitEthernet0/{}",
    "descriptions": True,
    "no_shutdown": True,
    "log_adj": True,
    "ospf_router_id": True,
}

DC_STYLE = {
    "indent": "  ",
    "bang": True,
    "preamble": ["service timestamps log datetime msec"],
    "epilogue": ["end"],
    "iface_fmt": "Ethernet1/{}",
    "iface_base": 1,
    "explicit_cost": True,
    "ospf_router_id": False,
}

ISP_STYLE = {
    "indent": " ",
    "bang": True,
    "preamble": ["version 15.4", "service password-encryption"],
    "epilogue": ["ip forward-protocol nd", "!", "end"],
    "iface_fmt": "TenGigabitEthernet0/0/{}",
    "descriptions": True,
    "ospf_router_id": True,
    "log_adj": True,
}

EDGE_STYLE = {
    "indent": " ",
    "bang": True,
    "preamble": ["version 15.2"],
    "epilogue": ["end"],
    "iface_fmt": "FastEthernet0/{}",
    "descriptions": True,
    "no_shutdown": False,
    "log_adj": False,
    "ospf_router_id": True,
}


class Net:
    """Allocates /30 link subnets from a base and wires routers."""

    def __init__(self, link_base):
        self.next_link = ipaddress.IPv4Address(link_base)
        self.edges = []

    def link(self, a, b, cost_a=None, cost_b=None):
        net = ipaddress.IPv4Network(f"{self.next_link}/30")
        self.next_link += 4
        ha, hb = str(net.network_address + 1), str(net.network_address + 2)
        a.add_iface(ha, 30, cost_a, f"link to {b.name}")
        b.add_iface(hb, 30, cost_b, f"link to {a.name}")
        self.edges.append((a.name, b.name))
        return ha, hb


def lan(router, subnet, host_name, hosts, desc="user LAN"):
    net = ipaddress.IPv4Network(subnet)
    gw = str(net.network_address + 1)
    ip = str(net.network_address + 100)
    router.add_iface(gw, net.prefixlen, None, desc)
    hosts.append(host_doc(host_name, ip, net.prefixlen, router.name, gw))


def campus(root):
    rs = {n: Router(n, IOS_CAMPUS) for n in ["r1", "r2", "r3", "r4", "r5"]}
    for i, r in enumerate(rs.values(), start=1):
        r.add_loopback(f"10.0.255.{i}")
    net = Net("10.0.100.0")
    for a, b in [("r1", "r2"), ("r1", "r4"), ("r2", "r3"), ("r2", "r4"),
                 ("r3", "r5"), ("r4", "r5")]:
        net.link(rs[a], rs[b])
    hosts = []
    lan(rs["r1"], "10.0.1.0/24", "h1", hosts)
    lan(rs["r2"], "10.0.2.0/24", "h2", hosts)
    lan(rs["r3"], "10.0.3.0/24", "h3", hosts)
    lan(rs["r5"], "10.0.5.0/24", "h5", hosts)
    for r in rs.values():
        r.ospf = {"pid": 1, "networks": [("10.0.0.0", "0.0.255.255")]}
    rs["r1"].tail.append(("acl", ["access-list 10 permit host 10.0.1.100",
                                  "access-list 10 permit host 10.0.2.100",
                                  "access-list 10 deny any"]))
    rs["r5"].tail.append(("acl", ["access-list 20 permit 10.0.5.0 0.0.0.255",
                                  "access-list 20 deny any"]))
    write_snapshot(root, "campus", rs.values(), hosts)


def small4(root):
    rs = {n: Router(n, EDGE_STYLE) for n in ["r1", "r2", "r3", "r4"]}
    net = Net("10.4.100.0")
    for a, b in [("r1", "r2"), ("r2", "r3"), ("r3", "r4"), ("r1", "r3")]:
        net.link(rs[a], rs[b])
    hosts = []
    lan(rs["r1"], "10.4.1.0/24", "h1", hosts)
    lan(rs["r4"], "10.4.4.0/24", "h4", hosts)
    for i, r in enumerate(rs.values(), start=1):
        r.router_id = f"10.4.255.{i}"
        r.ospf = {"pid": 10, "networks": [("10.4.0.0", "0.0.255.255")]}
    write_snapshot(root, "small4", rs.values(), hosts)


def fattree(root):
    names = ["c1", "c2", "a1", "a2", "a3", "a4", "e1", "e2", "e3", "e4"]
    rs = {n: Router(n, DC_STYLE) for n in names}
    net = Net("10.20.0.0")
    for c in ["c1", "c2"]:
        for a in ["a1", "a2", "a3", "a4"]:
            net.link(rs[c], rs[a])
    for a, e in [("a1", "e1"), ("a1", "e2"), ("a2", "e1"), ("a2", "e2"),
                 ("a3", "e3"), ("a3", "e4"), ("a4", "e3"), ("a4", "e4")]:
        net.link(rs[a], rs[e])
    hosts = []
    for i, e in enumerate(["e1", "e2", "e3", "e4"], start=1):
        lan(rs[e], f"10.21.{i}.0/24", f"s{i}", hosts, "server rack")
    for r in rs.values():
        r.ospf = {"pid": 100,
                  "networks": [("10.20.0.0", "0.0.255.255"),
                               ("10.21.0.0", "0.0.255.255")],
                  "extra": ["maximum-paths 8"]}
    write_snapshot(root, "fattree02", rs.values(), hosts)


def bgp2(root):
    a = {n: Router(n, IOS_CAMPUS, 100) for n in ["a1", "a2", "a3"]}
    b = {n: Router(n, EDGE_STYLE, 200) for n in ["b1", "b2", "b3"]}
    for i, r in enumerate(a.values(), start=1):
        r.add_loopback(f"10.1.255.{i}")
    for i, r in enumerate(b.values(), start=1):
        r.router_id = f"10.2.255.{i}"
    na = Net("10.1.100.0")
    na.link(a["a1"], a["a2"])
    na.link(a["a2"], a["a3"])
    na.link(a["a1"], a["a3"], 5, 5)
    nb = Net("10.2.100.0")
    b12 = nb.link(b["b1"], b["b2"])
    b13 = nb.link(b["b1"], b["b3"])
    nb.link(b["b2"], b["b3"])
    ext = Net("172.16.0.0")
    ext.link(a["a1"], b["b1"])
    hosts = []
    lan(a["a2"], "10.1.1.0/24", "h1", hosts)
    lan(a["a3"], "10.1.2.0/24", "h2", hosts)
    lan(a["a1"], "10.1.3.0/24", "h3", hosts)
    lan(b["b2"], "10.2.1.0/24", "h4", hosts)
    lan(b["b3"], "10.2.2.0/24", "h5", hosts)
    for r in a.values():
        r.ospf = {"pid": 1, "networks": [("10.1.0.0", "0.0.255.255")]}
    a["a1"].ospf["redistribute"] = ["bgp 100 subnets"]
    a["a1"].bgp = [
        "neighbor 172.16.0.2 remote-as 200",
        "neighbor 172.16.0.2 distribute-list 10 in",
        "redistribute connected",
        "redistribute ospf 1",
    ]
    a["a1"].tail.append(("acl", ["access-list 10 permit 10.2.0.0 0.0.255.255",
                                 "access-list 10 deny any"]))
    for r in b.values():
        r.ospf = {"pid": 1, "networks": [("10.2.0.0", "0.0.255.255")]}
    b["b1"].bgp = [
        "bgp router-id 10.2.255.1",
        "neighbor AS100 peer-group",
        "neighbor AS100 remote-as 100",
        "neighbor AS100 route-map FROM-AS100 in",
        "neighbor 172.16.0.1 peer-group AS100",
        f"neighbor {b12[1]} remote-as 200",
        f"neighbor {b12[1]} next-hop-self",
        f"neighbor {b13[1]} remote-as 200",
        f"neighbor {b13[1]} next-hop-self",
        "redistribute connected",
        "redistribute ospf 1",
    ]
    b["b1"].tail.append(("pl", ["ip prefix-list AS100-ALLOW seq 5 permit 10.1.1.0/24",
                                "ip prefix-list AS100-ALLOW seq 10 permit 10.1.3.0/24"]))
    b["b1"].tail.append(("rm", ["route-map FROM-AS100 permit 10",
                                " match ip address prefix-list AS100-ALLOW"]))
    b["b2"].bgp = [f"neighbor {b12[0]} remote-as 200"]
    b["b3"].bgp = [f"neighbor {b13[0]} remote-as 200"]
    write_snapshot(root, "bgp2", list(a.values()) + list(b.values()), hosts)


def ospf10(root):
    names = ["nyc", "chi", "was", "sea", "snv", "lax", "den", "ksc", "hou",
             "atl"]
    rs = {n: Router(n, ISP_STYLE) for n in names}
    for i, n in enumerate(names, start=1):
        rs[n].add_loopback(f"10.10.255.{i}")
    net = Net("10.10.100.0")
    weighted = [("nyc", "chi", 8), ("nyc", "was", 3), ("was", "atl", 6),
                ("atl", "hou", 8), ("ksc", "hou", 7), ("ksc", "den", 6),
                ("hou", "lax", 14), ("lax", "snv", 3), ("snv", "den", 10),
                ("snv", "sea", 8), ("sea", "den", 10), ("chi", "ksc", 9),
                ("atl", "chi", 7)]
    for x, y, cost in weighted:
        net.link(rs[x], rs[y], cost, cost)
    hosts = []
    for i, n in enumerate(["nyc", "sea", "lax", "hou", "chi"], start=1):
        lan(rs[n], f"10.11.{i}.0/24", f"pop-{n}", hosts, "customer aggregation")
    for r in rs.values():
        r.ospf = {"pid": 1, "networks": [("10.10.0.0", "0.0.255.255"),
                                         ("10.11.0.0", "0.0.255.255")]}
    write_snapshot(root, "ospf10", rs.values(), hosts)


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "fixtures")
    campus(root)
    small4(root)
    fattree(root)
    bgp2(root)
    ospf10(root)


if __name__ == "__main__":
    main()
