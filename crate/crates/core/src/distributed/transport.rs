//! Rank-to-rank transports.
//!
//! The engine needs two primitives: a paired exchange that returns only once
//! the peer's buffer has arrived, and a barrier across all ranks.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError, Sender};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::state::Scalar;

pub(crate) const ABORTED: &str = "run aborted by another rank";

const POLL: Duration = Duration::from_millis(5);

pub trait Transport<T: Scalar>: Sync {
    fn ranks(&self) -> usize;

    /// Sends `send` to `peer` and fills `recv` with what `peer` sent to `rank`.
    fn exchange(
        &self,
        rank: usize,
        peer: usize,
        send: &[Complex<T>],
        recv: &mut [Complex<T>],
    ) -> Result<()>;

    fn barrier(&self, rank: usize) -> Result<()>;

    /// Releases every rank blocked in `exchange` or `barrier` with an error.
    fn abort(&self);
}

struct Message<T> {
    from: usize,
    payload: Vec<Complex<T>>,
}

struct BarrierState {
    arrived: usize,
    generation: u64,
}

/// Ranks as threads of one process, exchanging over channels.
pub struct InProcessTransport<T: Scalar> {
    senders: Vec<Sender<Message<T>>>,
    receivers: Vec<Receiver<Message<T>>>,
    barrier: Mutex<BarrierState>,
    released: Condvar,
    aborted: AtomicBool,
    delivered_messages: Vec<AtomicU64>,
    delivered_bytes: Vec<AtomicU64>,
}

impl<T: Scalar> InProcessTransport<T> {
    pub fn new(ranks: usize) -> Self {
        let (senders, receivers) = (0..ranks).map(|_| unbounded()).unzip();
        InProcessTransport {
            senders,
            receivers,
            barrier: Mutex::new(BarrierState {
                arrived: 0,
                generation: 0,
            }),
            released: Condvar::new(),
            aborted: AtomicBool::new(false),
            delivered_messages: (0..ranks).map(|_| AtomicU64::new(0)).collect(),
            delivered_bytes: (0..ranks).map(|_| AtomicU64::new(0)).collect(),
        }
    }

    /// Messages and bytes sent by `rank`, as seen by the transport.
    pub fn delivered(&self, rank: usize) -> (u64, u64) {
        (
            self.delivered_messages[rank].load(Ordering::Relaxed),
            self.delivered_bytes[rank].load(Ordering::Relaxed),
        )
    }

    fn comm_err(rank: usize, peer: usize, reason: impl Into<String>) -> Error {
        Error::Communication {
            rank,
            peer,
            reason: reason.into(),
        }
    }
}

impl<T: Scalar> Transport<T> for InProcessTransport<T> {
    fn ranks(&self) -> usize {
        self.senders.len()
    }

    fn exchange(
        &self,
        rank: usize,
        peer: usize,
        send: &[Complex<T>],
        recv: &mut [Complex<T>],
    ) -> Result<()> {
        let ranks = self.ranks();
        if rank >= ranks || peer >= ranks || rank == peer {
            return Err(Self::comm_err(rank, peer, format!("invalid pair for {ranks} ranks")));
        }
        self.senders[peer]
            .send(Message {
                from: rank,
                payload: send.to_vec(),
            })
            .map_err(|_| Self::comm_err(rank, peer, "peer endpoint closed"))?;
        self.delivered_messages[rank].fetch_add(1, Ordering::Relaxed);
        self.delivered_bytes[rank].fetch_add(
            std::mem::size_of_val(send) as u64,
            Ordering::Relaxed,
        );

        let msg = loop {
            if self.aborted.load(Ordering::Acquire) {
                return Err(Self::comm_err(rank, peer, ABORTED));
            }
            match self.receivers[rank].recv_timeout(POLL) {
                Ok(m) => break m,
                Err(RecvTimeoutError::Timeout) => continue,
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Self::comm_err(rank, peer, "endpoint disconnected"))
                }
            }
        };
        if msg.from != peer {
            return Err(Self::comm_err(
                rank,
                peer,
                format!("unexpected message from rank {}", msg.from),
            ));
        }
        if msg.payload.len() != recv.len() {
            return Err(Self::comm_err(
                rank,
                peer,
                format!("expected {} amplitudes, got {}", recv.len(), msg.payload.len()),
            ));
        }
        recv.copy_from_slice(&msg.payload);
        Ok(())
    }

    fn barrier(&self, rank: usize) -> Result<()> {
        let ranks = self.ranks();
        let mut st = self.barrier.lock().unwrap();
        let generation = st.generation;
        st.arrived += 1;
        if st.arrived == ranks {
            st.arrived = 0;
            st.generation += 1;
            self.released.notify_all();
            return Ok(());
        }
        while st.generation == generation {
            if self.aborted.load(Ordering::Acquire) {
                return Err(Self::comm_err(rank, rank, ABORTED));
            }
            st = self.released.wait_timeout(st, POLL).unwrap().0;
        }
        Ok(())
    }

    fn abort(&self) {
        self.aborted.store(true, Ordering::Release);
        self.released.notify_all();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn paired_exchange_swaps_buffers() {
        let t = InProcessTransport::<f64>::new(2);
        let a = vec![Complex64::new(1.0, 0.0); 3];
        let b = vec![Complex64::new(0.0, 2.0); 3];
        std::thread::scope(|s| {
            let h = s.spawn(|| {
                let mut got = vec![Complex64::default(); 3];
                t.exchange(1, 0, &b, &mut got).unwrap();
                got
            });
            let mut got = vec![Complex64::default(); 3];
            t.exchange(0, 1, &a, &mut got).unwrap();
            assert_eq!(got, b);
            assert_eq!(h.join().unwrap(), a);
        });
        assert_eq!(t.delivered(0), (1, 48));
        assert_eq!(t.delivered(1), (1, 48));
    }

    #[test]
    fn barrier_releases_all_ranks() {
        let t = InProcessTransport::<f64>::new(4);
        std::thread::scope(|s| {
            for r in 0..4 {
                let t = &t;
                s.spawn(move || {
                    for _ in 0..10 {
                        t.barrier(r).unwrap();
                    }
                });
            }
        });
    }

    #[test]
    fn abort_unblocks_waiting_ranks() {
        let t = InProcessTransport::<f64>::new(2);
        std::thread::scope(|s| {
            let h = s.spawn(|| t.barrier(0));
            std::thread::sleep(Duration::from_millis(20));
            t.abort();
            assert!(matches!(h.join().unwrap(), Err(Error::Communication { .. })));
        });
        let mut buf = vec![Complex64::default(); 1];
        assert!(t.exchange(0, 1, &[Complex64::default()], &mut buf).is_err());
    }

    #[test]
    fn rejects_bad_pairs_and_sizes() {
        let t = InProcessTransport::<f64>::new(2);
        let mut buf = vec![Complex64::default(); 2];
        assert!(t.exchange(0, 0, &[], &mut buf).is_err());
        assert!(t.exchange(0, 2, &[], &mut buf).is_err());
    }
}
