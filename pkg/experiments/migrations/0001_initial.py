# Generated by Django 5.1.4 on 2026-09-28 10:12

import django.db.models.deletion
import uuid
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('run_id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('architecture', models.CharField(max_length=10)),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('diverged', 'Diverged')], default='running', max_length=10)),
                ('config', models.JSONField()),
                ('config_hash', models.CharField(db_index=True, max_length=64)),
                ('feedback_bits', models.PositiveIntegerField()),
                ('epochs', models.PositiveIntegerField(default=0)),
                ('best_val_se', models.FloatField(blank=True, null=True)),
                ('checkpoint_path', models.CharField(blank=True, max_length=500)),
                ('history_path', models.CharField(blank=True, max_length=500)),
            ],
            options={
                'ordering': ('-created_at',),
            },
        ),
        migrations.CreateModel(
            name='SweepResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('axis', models.CharField(choices=[('transmit_power_dbm', 'Transmit power (dBm)'), ('feedback_bits', 'Feedback bits')], max_length=20)),
                ('axis_value', models.FloatField()),
                ('method', models.CharField(max_length=20)),
                ('mean_se', models.FloatField()),
                ('stderr', models.FloatField()),
                ('n', models.PositiveIntegerField()),
                ('csv_path', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='results', to='experiments.trainingrun')),
            ],
            options={
                'ordering': ('axis', 'method', 'axis_value'),
            },
        ),
    ]
