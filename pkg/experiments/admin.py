from django.contrib import admin

from .models import SweepResult, TrainingRun


class SweepResultInline(admin.TabularInline):
    model = SweepResult
    extra = 0


class TrainingRunAdmin(admin.ModelAdmin):
    list_display = ('run_id', 'architecture', 'feedback_bits', 'status', 'best_val_se', 'created_at')
    list_filter = ('status', 'architecture')
    inlines = [SweepResultInline]


admin.site.register(TrainingRun, TrainingRunAdmin)
admin.site.register(SweepResult)
