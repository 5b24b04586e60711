//! Operating-system priority for the real-time step loop.

/// Keeps the calling thread under `SCHED_FIFO` until dropped, then restores
/// its previous policy.
pub(crate) struct RealtimePriority {
    #[cfg(target_os = "linux")]
    previous: (libc::c_int, libc::sched_param),
}

impl RealtimePriority {
    /// `None` if the platform has no such policy or the process lacks the
    /// privilege to use it.
    #[cfg(target_os = "linux")]
    pub(crate) fn acquire() -> Option<Self> {
        // SAFETY: plain calls on the current thread with valid out-pointers.
        unsafe {
            let thread = libc::pthread_self();
            let mut policy = 0;
            let mut param: libc::sched_param = std::mem::zeroed();
            if libc::pthread_getschedparam(thread, &mut policy, &mut param) != 0 {
                return None;
            }
            // Lowest real-time level: above every ordinary process, below
            // kernel and interrupt threads.
            let fifo = libc::sched_param {
                sched_priority: libc::sched_get_priority_min(libc::SCHED_FIFO),
            };
            if libc::pthread_setschedparam(thread, libc::SCHED_FIFO, &fifo) != 0 {
                return None;
            }
            Some(RealtimePriority {
                previous: (policy, param),
            })
        }
    }

    #[cfg(not(target_os = "linux"))]
    pub(crate) fn acquire() -> Option<Self> {
        None
    }
}

impl Drop for RealtimePriority {
    fn drop(&mut self) {
        #[cfg(target_os = "linux")]
        // SAFETY: restores the values read in `acquire` on the same thread.
        unsafe {
            let (policy, param) = self.previous;
            libc::pthread_setschedparam(libc::pthread_self(), policy, &param);
        }
    }
}
