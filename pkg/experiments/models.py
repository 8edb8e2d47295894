import uuid

from django.db import models


class TrainingRun(models.Model):
    class StatusChoices(models.TextChoices):
        RUNNING = 'running', 'Running'
        COMPLETED = 'completed', 'Completed'
        DIVERGED = 'diverged', 'Diverged'

    run_id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    created_at = models.DateTimeField(auto_now_add=True)
    architecture = models.CharField(max_length=10)
    status = models.CharField(max_length=10, choices=StatusChoices.choices, default=StatusChoices.RUNNING)
    config = models.JSONField()
    config_hash = models.CharField(max_length=64, db_index=True)
    feedback_bits = models.PositiveIntegerField()
    epochs = models.PositiveIntegerField(default=0)
    best_val_se = models.FloatField(null=True, blank=True)
    checkpoint_path = models.CharField(max_length=500, blank=True)
    history_path = models.CharField(max_length=500, blank=True)

    class Meta:
        ordering = ('-created_at',)

    def __str__(self):
        return f"{self.architecture} run {self.run_id} ({self.status})"


class SweepResult(models.Model):
    class AxisChoices(models.TextChoices):
        TRANSMIT_POWER = 'transmit_power_dbm', 'Transmit power (dBm)'
        FEEDBACK_BITS = 'feedback_bits', 'Feedback bits'

    run = models.ForeignKey(TrainingRun, on_delete=models.SET_NULL, null=True, blank=True, related_name='results')
    axis = models.CharField(max_length=20, choices=AxisChoices.choices)
    axis_value = models.FloatField()
    method = models.CharField(max_length=20)
    mean_se = models.FloatField()
    stderr = models.FloatField()
    n = models.PositiveIntegerField()
    csv_path = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ('axis', 'method', 'axis_value')

    def __str__(self):
        return f"{self.method} @ {self.axis}={self.axis_value:g}: {self.mean_se:.3f} bit/s/Hz"
