#!/usr/bin/env python3
# Copyright 2026 The clusterdiag Authors.
# SPDX-License-Identifier: Apache-2.0
"""Regenerates diagnosis_corpus.jsonl. Synthetic issue-tracker style records."""
import json
import pathlib

R = [
    # clock / throttle
    ("gpu frequency throttle", "gpu-freq", "gpu core clock throttled below nominal frequency",
     "Training step time tripled on one node. nvidia-smi shows SM clock near 200 MHz while the "
     "other cards hold 1410 MHz. Power draw on that card is far below its peers. Resetting the "
     "application clock restored throughput."),
    ("sm clock stuck after thermal event", "gpu-freq", "application clock left at reduced value after cooling recovered",
     "After a cooling outage the fans recovered but clocks stayed pinned at a low application "
     "setting. Reapplying the default application clocks fixed the slowdown."),
    ("power cap slowdown", "gpu-freq", "board power limit set too low caps sm clock",
     "A maintenance script lowered the power limit to 150 W. Under load the cards hit the cap "
     "and downclock. Restoring the default power limit returned full speed."),
    ("straggler rank slows allreduce", "gpu-freq", "single slow gpu gates every synchronous step",
     "One rank finishes each iteration late and all others wait in the collective. The late "
     "rank runs on a card with a reduced clock."),
    ("hw slowdown clocks event reason", "telemetry", "hardware slowdown flag asserted by the driver",
     "Clock event reasons report HW Slowdown active. Check PSU and thermal sensors; the flag "
     "forces a clock drop independent of load."),
    ("tensor core throughput low", "gpu-matmul", "matrix multiply rate below peak because of reduced clock",
     "A dense GEMM benchmark reaches only a fraction of the advertised FLOP rate on one device. "
     "The card reports a low SM clock during the run."),
    # network
    ("rdma bandwidth degraded", "rdma-rw", "network link negotiated at reduced speed",
     "ib_write_bw reports a fraction of line rate between two nodes. The port negotiated a "
     "lower width after a cable reseat. Replacing the cable restored bandwidth."),
    ("nccl allreduce timeout", "rdma-rw", "infiniband port flapping interrupts collectives",
     "Jobs abort with NCCL watchdog timeout in allreduce. Port counters show link down events "
     "on one HCA."),
    ("connection reset errno 104", "rdma-rw", "peer reset the rdma connection during transfer",
     "Workers log errno 104 connection reset by peer while exchanging gradients. The switch "
     "port was flapping."),
    ("roce pfc storm", "rdma-rw", "priority flow control pause storm throttles links",
     "RoCE traffic stalls cluster-wide. Pause frame counters explode on one switch port that "
     "keeps asserting PFC."),
    ("gpudirect disabled after driver update", "rdma-rw", "peer memory module not loaded so transfers bounce through host",
     "Inter-node bandwidth halved after a driver upgrade. nvidia_peermem was not loaded and "
     "traffic staged through host memory."),
    ("slow checkpoint upload over network", "rdma-rw", "shared storage traffic contends with training network",
     "Checkpoint uploads coincide with slow steps. Storage traffic shares the training fabric."),
    # memory
    ("gpu memory leak oom", "gpu-membw", "device memory leak in a long running process",
     "Free device memory shrinks every epoch until the job dies with CUDA out of memory. A "
     "cached tensor list grew without bound."),
    ("cuda allocator fragmentation", "gpu-membw", "allocator fragmentation leaves no large free block",
     "OOM occurs with plenty of total free memory. Reserved but unallocated memory is high; "
     "setting expandable segments avoided the failure."),
    ("hbm bandwidth below spec", "gpu-membw", "memory clock reduced on one card",
     "A stream copy test shows low device memory bandwidth on one GPU. Memory clock is below "
     "the default."),
    ("zombie process holds gpu memory", "gpu-membw", "orphaned process keeps device memory allocated",
     "New jobs fail to allocate memory on a card that nvidia-smi shows as idle. A defunct "
     "worker from an earlier run still held a context."),
    ("pinned host memory exhaustion", "", "host pinned memory pool exhausted by dataloader workers",
     "cudaHostAlloc fails after many dataloader workers start. Reducing workers fixed it."),
    ("kv cache growth inference oom", "gpu-membw", "unbounded kv cache growth during long generations",
     "Inference server memory grows with long prompts until out of memory. Cap the cache."),
    # storage
    ("disk full checkpoint write failure", "storage-rw", "local storage filled by accumulated checkpoints",
     "Saving a checkpoint fails with no space left on device. Old checkpoints were never "
     "rotated and filled the local NVMe."),
    ("dataloader stalls on storage", "storage-rw", "storage throughput saturated by concurrent readers",
     "GPU utilization drops while workers wait on file reads. The shared volume is saturated."),
    ("runaway debug logging", "storage-rw", "verbose logging fills the disk",
     "A debug flag left on wrote gigabytes of logs per hour until the disk filled."),
    ("inode exhaustion small files", "storage-rw", "filesystem ran out of inodes",
     "Writes fail although df shows free space. Millions of tiny shard files used every inode."),
    ("nvme smart media errors", "storage-rw", "failing nvme drive reports media errors",
     "Read errors and slow IO on one node. SMART log reports growing media errors."),
    ("tmp filled by compile cache", "storage-rw", "kernel compile cache fills temporary directory",
     "Triton cache under /tmp grew until other processes failed to write."),
    # ecc / hardware
    ("ecc uncorrectable xid 48", "gpu-matmul", "uncorrectable ecc error in gpu memory",
     "Driver logs Xid 48 double bit ECC error and the job crashes. The card needs a reset and "
     "page retirement."),
    ("nan loss after hardware error", "gpu-matmul", "silent data corruption from faulty gpu",
     "Loss becomes NaN only when a specific card participates. Matmul results on that card do "
     "not match a reference."),
    ("retired pages pending reboot", "gpu-membw", "page retirement pending until gpu reset",
     "nvidia-smi reports retired pages pending. Reset the card to apply retirement."),
    ("xid 79 fallen off bus", "", "gpu fell off the pcie bus",
     "The card disappears from the device list with Xid 79. Reseat or replace."),
    ("row remapping failure", "gpu-matmul", "memory row remapping failed on gpu",
     "Remapping failure flag set after repeated ECC errors. The card must be replaced."),
    ("nvlink crc errors", "gpu-matmul", "nvlink replay errors corrupt peer transfers",
     "NVLink counters show CRC errors and replays between two cards; peer copies are slow."),
    # software / config
    ("mismatched cuda driver version", "", "user space cuda library newer than the driver",
     "Jobs fail at init with CUDA driver version is insufficient for CUDA runtime version."),
    ("nccl wrong network interface", "", "collective library picked the management interface",
     "Bandwidth is low because NCCL_SOCKET_IFNAME was unset and traffic used the 1G port."),
    ("container missing device plugin", "", "device plugin not running so no gpus are exposed",
     "Pods schedule but see no GPUs. The device plugin daemonset had crashed."),
    ("ssh host key changed", "", "reimaged node presents a new ssh host key",
     "Launcher fails to reach a node after reimaging with host key verification failed."),
    ("clock skew breaks rendezvous", "", "node clocks drifted apart and leases expire early",
     "Elastic rendezvous keeps timing out. NTP was disabled on two nodes."),
    ("cpu governor powersave", "telemetry", "cpu frequency governor left in powersave mode",
     "Dataloader is CPU bound. The governor on that host is powersave."),
    ("numa misbinding slow h2d", "telemetry", "process bound to the far numa node",
     "Host to device copies are slow on some ranks. Processes ran on the NUMA node far from "
     "the card."),
    ("fan failure overheating", "telemetry", "failed fan raises temperature and triggers thermal slowdown",
     "Temperature alarms on one chassis; the card drops clocks as it heats. One fan reads 0 RPM."),
    ("pcie link width x8", "telemetry", "gpu trained at reduced pcie link width",
     "lspci shows the card at x8 instead of x16; host transfers are half speed."),
    ("job hangs at barrier", "", "one rank crashed without notifying peers",
     "Everyone waits at a barrier forever. One worker died from a segfault without tearing "
     "down the group."),
]


def main():
    out = pathlib.Path(__file__).with_name("diagnosis_corpus.jsonl")
    with out.open("w") as f:
        for key, fn, result, raw in R:
            f.write(json.dumps({"problemkey": key, "rawtext": raw, "function": fn, "result": result}) + "\n")
    print(f"{len(R)} records -> {out}")


if __name__ == "__main__":
    main()
