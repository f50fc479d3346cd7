use serde::{Deserialize, Serialize};

use super::{DataError, DataView, Dataset};

/// One task's ordered training slice, its validation tail, and a read cursor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSubset {
    pub id: usize,
    pub train: Dataset,
    pub val: Dataset,
    /// Classes this task is expected to cover.
    pub class_set: Vec<usize>,
    cursor: usize,
}

/// A batch handed out by [`TaskSubset::next_batch`].
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub task: usize,
    pub start: usize,
    pub data: DataView<'a>,
}

impl TaskSubset {
    pub fn new(id: usize, train: Dataset, val: Dataset, class_set: Vec<usize>) -> Self {
        Self {
            id,
            train,
            val,
            class_set,
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.train.len() - self.cursor
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.train.len()
    }

    /// Label of the next unread training example.
    pub fn peek_label(&self) -> Option<usize> {
        self.train.labels().get(self.cursor).copied()
    }

    /// Takes up to `b` examples in order and advances the cursor.
    pub fn next_batch(&mut self, b: usize) -> Result<Batch<'_>, DataError> {
        if self.is_exhausted() {
            return Err(DataError::Exhausted { task: self.id });
        }
        let start = self.cursor;
        let end = (start + b.max(1)).min(self.train.len());
        self.cursor = end;
        Ok(Batch {
            task: self.id,
            start,
            data: self.train.slice(start..end),
        })
    }

    pub fn reset(&mut self) {
        self.cursor = 0;
    }
}

/// All task subsets of a run plus the pooled validation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSubsets {
    pub tasks: Vec<TaskSubset>,
    pub pooled_val: Dataset,
}

impl TaskSubsets {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.pooled_val.classes()
    }

    pub fn dim(&self) -> usize {
        self.pooled_val.dim()
    }

    pub fn upcoming(&self) -> Vec<Option<usize>> {
        self.tasks.iter().map(TaskSubset::peek_label).collect()
    }

    pub fn reset_cursors(&mut self) {
        self.tasks.iter_mut().for_each(TaskSubset::reset);
    }

    pub fn min_train_len(&self) -> usize {
        self.tasks.iter().map(TaskSubset::len).min().unwrap_or(0)
    }
}

/// Contiguous equal-size blocks: example `k` of `n` goes to task `k·N / n`.
pub fn block_assignment(n: usize, tasks: usize) -> Vec<usize> {
    (0..n).map(|k| k * tasks / n.max(1)).collect()
}

/// Splits a dataset into tasks, holding out the ordered tail of each task as
/// its validation contribution.
///
/// A task with `m` examples keeps `round(m · val_fraction)` for validation.
pub fn split_tasks(
    ds: &Dataset,
    assignment: &[usize],
    val_fraction: f64,
) -> Result<TaskSubsets, DataError> {
    if assignment.len() != ds.len() {
        return Err(DataError::AssignmentLength {
            expected: ds.len(),
            found: assignment.len(),
        });
    }
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(DataError::BadFraction(val_fraction));
    }
    let n_tasks = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_tasks];
    for (row, &t) in assignment.iter().enumerate() {
        members[t].push(row);
    }

    let mut tasks = Vec::with_capacity(n_tasks);
    let mut pooled_rows = Vec::new();
    for (id, rows) in members.iter().enumerate() {
        if rows.is_empty() {
            return Err(DataError::EmptyTask(id));
        }
        let n_val = ((rows.len() as f64) * val_fraction).round() as usize;
        let n_train = rows.len() - n_val;
        if n_train == 0 {
            return Err(DataError::EmptyTask(id));
        }
        let train = ds.select(&rows[..n_train]);
        let val = ds.select(&rows[n_train..]);
        pooled_rows.extend_from_slice(&rows[n_train..]);
        let mut class_set: Vec<usize> = train.labels().to_vec();
        class_set.sort_unstable();
        class_set.dedup();
        tasks.push(TaskSubset::new(id, train, val, class_set));
    }
    // pooled validation keeps task order, then within-task order
    let pooled_val = ds.select(&pooled_rows);
    if pooled_val.is_empty() {
        return Err(DataError::EmptyValidation);
    }
    Ok(TaskSubsets { tasks, pooled_val })
}
